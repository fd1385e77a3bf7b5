//! The unipotent logarithm and nilpotent exponential.
//!
//! For `n x n` matrices both series terminate after `n - 1` terms, so the two
//! maps are mutually inverse polynomial maps between unipotent and nilpotent
//! matrices over Q.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{ExactMatrix, MatrixError};

/// `log M = sum_{k=1}^{n-1} (-1)^{k+1} (M - I)^k / k`.
pub fn unipotent_log(m: &ExactMatrix) -> Result<ExactMatrix, MatrixError> {
    m.require_square()?;
    let n = m.rows();
    let a = m.checked_sub(&ExactMatrix::identity(n))?;
    let terms = nilpotent_powers(&a).ok_or(MatrixError::NotUnipotent)?;
    let mut out = ExactMatrix::zeros(n, n);
    for (k, power) in terms.iter().enumerate().skip(1) {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        let c = BigRational::new(BigInt::from(sign), BigInt::from(k));
        out = &out + &power.scale(&c);
    }
    Ok(out)
}

/// `exp A = sum_{k=0}^{n-1} A^k / k!`.
pub fn nilpotent_exp(a: &ExactMatrix) -> Result<ExactMatrix, MatrixError> {
    a.require_square()?;
    let n = a.rows();
    let terms = nilpotent_powers(a).ok_or(MatrixError::NotNilpotent)?;
    let mut out = ExactMatrix::zeros(n, n);
    let mut fact = BigInt::one();
    for (k, power) in terms.iter().enumerate() {
        if k > 1 {
            fact *= BigInt::from(k);
        }
        out = &out + &power.scale(&BigRational::new(BigInt::one(), fact.clone()));
    }
    Ok(out)
}

/// Powers `A^0, ..., A^{n-1}` of a nilpotent matrix, or `None` when `A^n != 0`.
fn nilpotent_powers(a: &ExactMatrix) -> Option<Vec<ExactMatrix>> {
    let n = a.rows();
    let mut powers = Vec::with_capacity(n);
    let mut p = ExactMatrix::identity(n);
    for _ in 0..n {
        let next = &p * a;
        powers.push(p);
        p = next;
    }
    if !p.is_zero() {
        return None;
    }
    // Trailing zero powers add nothing.
    while powers.len() > 1 && powers.last().is_some_and(ExactMatrix::is_zero) {
        powers.pop();
    }
    if n == 0 {
        powers.clear();
    }
    Some(powers)
}

/// Inverse of a unipotent matrix through the terminating geometric series
/// `sum_k (-1)^k (M - I)^k`.
pub fn unipotent_inverse(m: &ExactMatrix) -> Result<ExactMatrix, MatrixError> {
    m.require_square()?;
    let n = m.rows();
    let a = m.checked_sub(&ExactMatrix::identity(n))?;
    let terms = nilpotent_powers(&a).ok_or(MatrixError::NotUnipotent)?;
    let mut out = ExactMatrix::zeros(n, n);
    for (k, power) in terms.iter().enumerate() {
        if k % 2 == 0 {
            out = &out + power;
        } else {
            out = &out - power;
        }
    }
    if n == 0 {
        return Ok(out);
    }
    Ok(out)
}
