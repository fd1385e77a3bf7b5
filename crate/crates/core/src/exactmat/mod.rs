//! Exact dense matrices over Z and Q.

mod logexp;
mod matrix;
mod normal_form;
mod residue;

use thiserror::Error;

pub use logexp::{nilpotent_exp, unipotent_inverse, unipotent_log};
pub use matrix::Matrix;
pub use normal_form::{
    hermite_form, hermite_solve, pivot_columns, smith_form, smith_invariants, SmithForm,
    SmithInvariants,
};
pub use residue::{reduce_mod, ResidueMatrix};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Matrix of exact rationals.
pub type ExactMatrix = Matrix<BigRational>;
/// Matrix of arbitrary-precision integers.
pub type IntMatrix = Matrix<BigInt>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("entry ({row}, {col}) is not an integer")]
    NonIntegral { row: usize, col: usize },
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn e(i: usize, j: usize) -> ExactMatrix {
        ExactMatrix::unit(3, i, j)
    }

    #[test]
    fn arithmetic_examples() {
        let id = ExactMatrix::identity(3);
        assert_eq!(&id * &id, id);
        let two = rat(2, 1);
        let a = &id + &e(1, 2).scale(&two);
        let b = &id + &e(2, 3).scale(&two);
        let expected = &(&(&id + &e(1, 2).scale(&two)) + &e(2, 3).scale(&two)) + &e(1, 3).scale(&rat(4, 1));
        assert_eq!(&a * &b, expected);
        let u = &id + &e(1, 2);
        assert_eq!(u.inverse().unwrap(), &id - &e(1, 2));
    }

    #[test]
    fn arithmetic_errors() {
        let a = ExactMatrix::identity(2);
        let b = ExactMatrix::identity(3);
        assert!(matches!(a.checked_mul(&b), Err(MatrixError::DimensionMismatch { .. })));
        assert!(matches!(a.checked_add(&b), Err(MatrixError::DimensionMismatch { .. })));
        assert_eq!(ExactMatrix::zeros(2, 2).inverse(), Err(MatrixError::Singular));
    }

    #[test]
    fn unimodular_inverse_is_integral() {
        let m = ExactMatrix::from_rows(vec![
            vec![rat(2, 1), rat(1, 1)],
            vec![rat(5, 1), rat(3, 1)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(inv.is_integral());
        assert_eq!(&m * &inv, ExactMatrix::identity(2));
        assert_eq!(m.det().unwrap(), rat(1, 1));
        assert_eq!(m.to_integer().unwrap().det_int().unwrap(), BigInt::from(1));
    }

    #[test]
    fn signed_powers() {
        let u = &ExactMatrix::identity(3) + &e(1, 2);
        assert_eq!(u.powi(-3).unwrap(), &ExactMatrix::identity(3) - &e(1, 2).scale(&rat(3, 1)));
        assert_eq!(u.powi(0).unwrap(), ExactMatrix::identity(3));
    }

    #[test]
    fn predicates() {
        let id = ExactMatrix::identity(3);
        assert!(id.is_unipotent() && id.is_integral());
        assert!(e(1, 3).is_nilpotent());
        assert!(!id.is_nilpotent());
        assert!(!(&id + &e(1, 1)).is_unipotent());
    }

    #[test]
    fn row_combination_solve() {
        let basis = ExactMatrix::from_rows(vec![
            vec![rat(1, 1), rat(0, 1), rat(1, 1)],
            vec![rat(0, 1), rat(2, 1), rat(0, 1)],
        ])
        .unwrap();
        let x = basis.solve_row_combination(&[rat(3, 1), rat(1, 1), rat(3, 1)]).unwrap();
        assert_eq!(x, vec![rat(3, 1), rat(1, 2)]);
        assert!(basis.solve_row_combination(&[rat(0, 1), rat(0, 1), rat(1, 1)]).is_none());
    }
}
