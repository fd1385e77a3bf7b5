//! Scalar traits the matrix code is generic over.
//!
//! Everything in this crate is exact: integers are [`BigInt`] and the field
//! is [`BigRational`]. The traits only exist so that the same dense matrix
//! code serves both rings (and machine integers in tests).

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed};

/// A commutative ring with exact arithmetic.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> {}

impl<T> Scalar for T where T: Clone + Debug + PartialEq + Num + Neg<Output = T> {}

/// A scalar ring in which every nonzero element is invertible.
pub trait FieldScalar: Scalar {
    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl<T> FieldScalar for Ratio<T> where T: Clone + Integer + Debug + Neg<Output = T> {}

/// Scalars that have a notion of integrality and an integer embedding.
pub trait Integral: Scalar {
    type Int: Clone + Integer + Signed + Debug;

    fn is_integer(&self) -> bool;
    /// Denominator in lowest terms (always 1 for integer types).
    fn denom(&self) -> Self::Int;
    /// Numerator in lowest terms.
    fn numer(&self) -> Self::Int;
    fn from_int(value: Self::Int) -> Self;
}

impl Integral for BigRational {
    type Int = BigInt;

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }
    fn denom(&self) -> BigInt {
        Ratio::denom(self).clone()
    }
    fn numer(&self) -> BigInt {
        Ratio::numer(self).clone()
    }
    fn from_int(value: BigInt) -> Self {
        BigRational::from_integer(value)
    }
}

impl Integral for BigInt {
    type Int = BigInt;

    fn is_integer(&self) -> bool {
        true
    }
    fn denom(&self) -> BigInt {
        BigInt::one()
    }
    fn numer(&self) -> BigInt {
        self.clone()
    }
    fn from_int(value: BigInt) -> Self {
        value
    }
}

impl Integral for Ratio<i64> {
    type Int = i64;

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }
    fn denom(&self) -> i64 {
        *Ratio::denom(self)
    }
    fn numer(&self) -> i64 {
        *Ratio::numer(self)
    }
    fn from_int(value: i64) -> Self {
        Ratio::from_integer(value)
    }
}

#[cfg(test)]
pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Least common multiple of the denominators of a list of rationals.
pub fn denominator_lcm<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a BigRational>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

