//! Matrices of integer polynomials over a common integer denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use crate::exactmat::ExactMatrix;
use crate::scalar::denominator_lcm;

/// Represents `entries / denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PMat {
    pub rows: usize,
    pub cols: usize,
    pub denom: BigInt,
    pub entries: Vec<Poly>,
}

impl PMat {
    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            denom: BigInt::one(),
            entries: (0..n * n)
                .map(|k| if k / n == k % n { Poly::constant(1) } else { Poly::zero() })
                .collect(),
        }
    }

    pub fn from_const(m: &ExactMatrix) -> Self {
        let denom = denominator_lcm(m.entries());
        let entries = m
            .entries()
            .iter()
            .map(|x| Poly::constant(x.numer() * (&denom / x.denom())))
            .collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            denom,
            entries,
        }
    }

    /// Matrix of consecutive variables starting at `first`, row-major.
    pub fn variables(rows: usize, cols: usize, first: u32) -> Self {
        Self {
            rows,
            cols,
            denom: BigInt::one(),
            entries: (0..rows * cols).map(|k| Poly::var(first + k as u32)).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.denom.is_one()
            && self.entries.iter().enumerate().all(|(k, p)| {
                if k / self.cols == k % self.cols {
                    *p == Poly::constant(1)
                } else {
                    p.is_zero()
                }
            })
    }

    pub fn mul(&self, other: &PMat) -> PMat {
        assert_eq!(self.cols, other.rows, "polynomial matrix shapes");
        if other.is_identity() {
            return self.clone();
        }
        if self.is_identity() {
            return other.clone();
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let pairs: Vec<(&Poly, &Poly)> = (0..self.cols).map(|k| (self.get(i, k), other.get(k, j))).collect();
                entries.push(Poly::dot(&pairs));
            }
        }
        PMat {
            rows: self.rows,
            cols: other.cols,
            denom: &self.denom * &other.denom,
            entries,
        }
        .normalized()
    }

    /// Brings both to a common denominator and returns `(L, a', b')` with
    /// `self = a'/L`, `other = b'/L`.
    fn common(&self, other: &PMat) -> (BigInt, Vec<Poly>, Vec<Poly>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "polynomial matrix shapes");
        let l = self.denom.lcm(&other.denom);
        let fa = &l / &self.denom;
        let fb = &l / &other.denom;
        let a = self.entries.iter().map(|p| p.scale(&fa)).collect();
        let b = other.entries.iter().map(|p| p.scale(&fb)).collect();
        (l, a, b)
    }

    pub fn add(&self, other: &PMat) -> PMat {
        let (denom, a, b) = self.common(other);
        PMat {
            rows: self.rows,
            cols: self.cols,
            denom,
            entries: a.iter().zip(&b).map(|(x, y)| x.add(y)).collect(),
        }
        .normalized()
    }

    pub fn sub(&self, other: &PMat) -> PMat {
        self.add(&other.scale(&BigRational::from_integer(-BigInt::one())))
    }

    pub fn scale(&self, c: &BigRational) -> PMat {
        PMat {
            rows: self.rows,
            cols: self.cols,
            denom: &self.denom * c.denom(),
            entries: self.entries.iter().map(|p| p.scale(c.numer())).collect(),
        }
        .normalized()
    }

    /// Sum of `polys[k] * consts[k]` with scalar polynomial weights.
    pub fn combination(weights: &[Poly], consts: &[ExactMatrix]) -> PMat {
        let (rows, cols) = (consts[0].rows(), consts[0].cols());
        let denom = denominator_lcm(consts.iter().flat_map(|m| m.entries()));
        let entries = (0..rows * cols)
            .map(|idx| {
                Poly::from_terms(weights.iter().zip(consts).flat_map(|(w, m)| {
                    let x = &m.entries()[idx];
                    let k = x.numer() * (&denom / x.denom());
                    w.scale(&k).terms().to_vec()
                }))
            })
            .collect();
        PMat {
            rows,
            cols,
            denom,
            entries,
        }
    }

    pub fn det(&self) -> PMat {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let cols: Vec<usize> = (0..n).collect();
        let value = laplace(self, 0, &cols);
        PMat {
            rows: 1,
            cols: 1,
            denom: num_traits::pow(self.denom.clone(), n),
            entries: vec![value],
        }
        .normalized()
    }

    /// Divides numerator and denominator by their common factor.
    fn normalized(mut self) -> PMat {
        if self.denom.is_one() {
            return self;
        }
        let g = self.entries.iter().fold(self.denom.clone(), |g, p| g.gcd(&p.content()));
        if !g.is_one() {
            let g = if self.denom.is_negative() { -g } else { g };
            self.denom /= &g;
            self.entries = self
                .entries
                .iter()
                .map(|p| Poly::from_terms(p.terms().iter().map(|(m, c)| (m.clone(), c / &g))))
                .collect();
        }
        self
    }

    /// Integer equations `self - other = 0`, each multiplied by the least
    /// integer clearing its denominators.
    pub fn equations(&self, other: &PMat) -> Vec<Poly> {
        let (l, a, b) = self.common(other);
        a.iter()
            .zip(&b)
            .map(|(x, y)| {
                let diff = x.sub(y);
                let g = diff.content().gcd(&l);
                if g.is_one() || g.is_zero() {
                    diff
                } else {
                    Poly::from_terms(diff.terms().iter().map(|(m, c)| (m.clone(), c / &g)))
                }
            })
            .collect()
    }
}

fn laplace(m: &PMat, row: usize, cols: &[usize]) -> Poly {
    if cols.len() == 1 {
        return m.get(row, cols[0]).clone();
    }
    let mut total = Poly::zero();
    for (k, &c) in cols.iter().enumerate() {
        let entry = m.get(row, c);
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = laplace(m, row + 1, &rest);
        let term = entry.mul(&minor);
        total = if k % 2 == 0 { total.add(&term) } else { total.sub(&term) };
    }
    total
}

/// `sum_{k=0}^{n-1} (-1)^k (X - I)^k`, the inverse of a unipotent `X`.
pub(crate) fn unipotent_inverse_series(x: &PMat) -> PMat {
    let n = x.rows;
    let id = PMat::identity(n);
    let nil = x.sub(&id);
    let mut acc = id.clone();
    let mut power = id;
    for k in 1..n {
        power = power.mul(&nil);
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        acc = acc.add(&power.scale(&BigRational::from_integer(sign)));
    }
    acc
}

/// `sum_{k=1}^{n-1} (-1)^{k+1} (X - I)^k / k`.
pub(crate) fn unipotent_log_series(x: &PMat) -> PMat {
    let n = x.rows;
    let nil = x.sub(&PMat::identity(n));
    let mut acc = PMat {
        rows: n,
        cols: n,
        denom: BigInt::one(),
        entries: vec![Poly::zero(); n * n],
    };
    let mut power = PMat::identity(n);
    for k in 1..n {
        power = power.mul(&nil);
        let sign: i64 = if k % 2 == 1 { 1 } else { -1 };
        acc = acc.add(&power.scale(&BigRational::new(BigInt::from(sign), BigInt::from(k))));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::unipotent_log;
    use crate::scalar::rat;

    fn eval(m: &PMat, point: &[BigInt]) -> ExactMatrix {
        ExactMatrix::from_fn(m.rows, m.cols, |i, j| BigRational::new(m.get(i, j).eval(point), m.denom.clone()))
    }

    fn point3() -> Vec<BigInt> {
        // A unipotent integral 3x3 matrix, row-major.
        [1, 2, -3, 0, 1, 5, 0, 0, 1].iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn series_match_exact_operations() {
        let x = PMat::variables(3, 3, 0);
        let pt = point3();
        let m = eval(&x, &pt);
        assert_eq!(eval(&unipotent_inverse_series(&x), &pt), m.inverse().unwrap());
        assert_eq!(eval(&unipotent_log_series(&x), &pt), unipotent_log(&m).unwrap());
    }

    #[test]
    fn determinant_matches() {
        let x = PMat::variables(3, 3, 0);
        let pt: Vec<BigInt> = [2, 1, 0, 3, -1, 4, 0, 5, 1].iter().map(|&x| BigInt::from(x)).collect();
        let d = x.det();
        assert_eq!(eval(&d, &pt)[(0, 0)], eval(&x, &pt).det().unwrap());
    }

    #[test]
    fn rational_constants_are_cleared() {
        let half = ExactMatrix::from_rows(vec![vec![rat(1, 2), rat(0, 1)], vec![rat(0, 1), rat(1, 3)]]).unwrap();
        let c = PMat::from_const(&half);
        assert_eq!(c.denom, BigInt::from(6));
        let eqs = c.equations(&PMat::identity(2));
        // x/2 = 1 becomes 1 - 2 = -1 after clearing: a constant contradiction.
        assert_eq!(eqs[0], Poly::constant(-1));
        assert_eq!(eqs[3], Poly::constant(-2));
    }
}
