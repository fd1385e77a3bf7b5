//! Deciding profinite isomorphism of virtually polycyclic groups at desk
//! scale.
//!
//! Groups are given by integral matrices: a lattice T-group `N` sits inside
//! `G` as a normal subgroup with abelian quotient. The crate builds the
//! log-lattice of `N`, the Diophantine system whose local solvability is
//! equivalent to the existence of an isomorphism of profinite completions
//! extending a given quotient isomorphism, and a budgeted p-adic solver that
//! issues certificates in both directions.

pub mod decider;
pub mod exactmat;
pub mod localsolve;
pub mod malcev;
pub mod scalar;
pub mod sysbuild;
pub mod words;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use exactmat::{ExactMatrix, IntMatrix, Matrix, MatrixError, ResidueMatrix};

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;
