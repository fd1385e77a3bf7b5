use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::MatrixError;
use crate::scalar::{FieldScalar, Integral, Scalar};

/// Dense row-major matrix over an exact scalar ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Shape {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(MatrixError::Shape {
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// The matrix unit `E_ij` (1-based indices, as in the usual notation).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        Self::from_fn(n, n, |a, b| {
            if a + 1 == i && b + 1 == j {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = &self[(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let prod = a.clone() * b.clone();
                        let slot = &mut out.data[i * other.cols + j];
                        *slot = slot.clone() + prod;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Lie bracket `xy - yx`.
    pub fn bracket(&self, other: &Self) -> Result<Self, MatrixError> {
        self.checked_mul(other)?
            .checked_sub(&other.checked_mul(self)?)
    }

    /// Nonnegative integer power by repeated squaring.
    pub fn pow(&self, mut exp: u64) -> Result<Self, MatrixError> {
        self.require_square()?;
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `M^n = 0` where `n` is the dimension.
    pub fn is_nilpotent(&self) -> bool {
        self.is_square() && self.pow(self.rows as u64).is_ok_and(|p| p.is_zero())
    }

    /// `(M - I)^n = 0`; accepts conjugates of unitriangular matrices, not just
    /// upper-triangular ones.
    pub fn is_unipotent(&self) -> bool {
        self.is_square()
            && self
                .checked_sub(&Self::identity(self.rows))
                .is_ok_and(|a| a.is_nilpotent())
    }

    pub fn trace(&self) -> Result<T, MatrixError> {
        self.require_square()?;
        Ok((0..self.rows).fold(T::zero(), |acc, i| acc + self[(i, i)].clone()))
    }

    pub(crate) fn require_square(&self) -> Result<(), MatrixError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(MatrixError::NotSquare(self.rows, self.cols))
        }
    }

    fn same_shape(&self, other: &Self) -> Result<(), MatrixError> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(MatrixError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            })
        }
    }
}

impl<T: FieldScalar> Matrix<T> {
    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Self, MatrixError> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(MatrixError::Singular)?;
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let p = a[(col, col)].recip();
            a.scale_row(col, &p);
            inv.scale_row(col, &p);
            for r in 0..n {
                if r != col && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    a.add_row_multiple(r, col, &-f.clone());
                    inv.add_row_multiple(r, col, &-f);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> Result<T, MatrixError> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Ok(T::zero());
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            let pr = p.recip();
            for r in col + 1..n {
                if !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone() * pr.clone();
                    a.add_row_multiple(r, col, &-f);
                }
            }
        }
        Ok(det)
    }

    /// Signed integer power; negative exponents go through [`Matrix::inverse`].
    pub fn powi(&self, exp: i64) -> Result<Self, MatrixError> {
        if exp >= 0 {
            self.pow(exp as u64)
        } else {
            self.inverse()?.pow(exp.unsigned_abs())
        }
    }

    /// Solves `x · self = target` for a row vector `x`, where the rows of
    /// `self` are linearly independent. Returns `None` when `target` is not
    /// in the row span.
    pub fn solve_row_combination(&self, target: &[T]) -> Option<Vec<T>> {
        assert_eq!(target.len(), self.cols, "target length must match columns");
        // Eliminate on the transposed system [rows^T | target].
        let r = self.rows;
        let mut aug: Vec<Vec<T>> = (0..self.cols)
            .map(|j| {
                let mut row: Vec<T> = (0..r).map(|i| self[(i, j)].clone()).collect();
                row.push(target[j].clone());
                row
            })
            .collect();
        let mut pivot_cols = Vec::new();
        let mut prow = 0;
        for col in 0..r {
            let Some(p) = (prow..aug.len()).find(|&i| !aug[i][col].is_zero()) else {
                continue;
            };
            aug.swap(p, prow);
            let inv = aug[prow][col].recip();
            for x in aug[prow].iter_mut() {
                *x = x.clone() * inv.clone();
            }
            for i in 0..aug.len() {
                if i != prow && !aug[i][col].is_zero() {
                    let f = aug[i][col].clone();
                    let pivot_row = aug[prow].clone();
                    for (x, y) in aug[i].iter_mut().zip(&pivot_row) {
                        *x = x.clone() - y.clone() * f.clone();
                    }
                }
            }
            pivot_cols.push(col);
            prow += 1;
        }
        if aug[prow..].iter().any(|row| !row[r].is_zero()) {
            return None;
        }
        let mut x = vec![T::zero(); r];
        for (i, &c) in pivot_cols.iter().enumerate() {
            x[c] = aug[i][r].clone();
        }
        Some(x)
    }
}

impl<T: Integral> Matrix<T> {
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(Integral::is_integer)
    }

    /// Integer matrix of the entries, or an error naming the first
    /// non-integral entry.
    pub fn to_integer(&self) -> Result<Matrix<BigInt>, MatrixError>
    where
        T::Int: Into<BigInt>,
    {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].is_integer() {
                    return Err(MatrixError::NonIntegral { row: i, col: j });
                }
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.numer().into()).collect(),
        })
    }
}

impl<T: Scalar> Matrix<T> {
    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn scale_row(&mut self, r: usize, c: &T) {
        for j in 0..self.cols {
            let x = &mut self.data[r * self.cols + j];
            *x = x.clone() * c.clone();
        }
    }

    /// `row[dst] += c * row[src]`
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, c: &T) {
        for j in 0..self.cols {
            let v = self.data[src * self.cols + j].clone() * c.clone();
            let x = &mut self.data[dst * self.cols + j];
            *x = x.clone() + v;
        }
    }
}

impl Matrix<BigInt> {
    pub fn to_rational(&self) -> Matrix<BigRational> {
        self.map(|x| BigRational::from_integer(x.clone()))
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det_int(&self) -> Result<BigInt, MatrixError> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !a[(r, k)].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                a.swap_rows(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * a[(n - 1, n - 1)].clone())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; use the checked_* methods when the
// shapes come from user input.
impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}{}", self.rows, self.cols, self)
    }
}
