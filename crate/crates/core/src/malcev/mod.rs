//! Lattice T-groups: log-lattices, the BCH product, membership, structure
//! constants and the finite quotients `N / exp(mL)`.

mod fingerprint;
pub mod group;
mod lattice;
mod quotient;

use thiserror::Error;

pub use fingerprint::{
    fingerprint, fingerprint_compare, quotient_invariants, Comparison, Divergence, Fingerprint,
    QuotientInvariants,
};
pub use lattice::{bch, lattice_closure, structure_constants, Closure, LieLattice, StructureConstants};
pub use quotient::{BchLaw, LatticeQuotient, MAX_QUOTIENT_ORDER};

use crate::exactmat::{ExactMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalcevError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("expected {expected}x{expected} matrices, found dimension {found}")]
    Dimension { expected: usize, found: usize },
    #[error("bracket [e{i}, e{j}] lies outside the rational span of the basis")]
    BracketOutsideSpan { i: usize, j: usize },
    #[error("lattice is not closed under the BCH product")]
    NotClosed,
    #[error("generator logs do not span a lattice group; the BCH hull is strictly larger")]
    Saturated,
    #[error("modulus {0} is not admissible for this lattice")]
    InadmissibleModulus(u64),
    #[error("quotient of order {modulus}^{rank} is too large")]
    QuotientTooLarge { modulus: u64, rank: usize },
    #[error("fingerprints were computed over different moduli")]
    ModuliMismatch,
}

/// A lattice T-group given by unipotent integral generator matrices.
#[derive(Clone, Debug)]
pub struct TGroupRep {
    n: usize,
    generators: Vec<ExactMatrix>,
    lattice: LieLattice,
    lattice_declared: bool,
}

impl TGroupRep {
    /// Builds the log-lattice of `<generators>`. When the BCH hull is strictly
    /// larger than the Z-span of the logs the input is not a lattice group;
    /// it is rejected unless `allow_hull`, in which case the hull group is
    /// used and the representation records that it was not declared.
    pub fn new(n: usize, generators: Vec<ExactMatrix>, allow_hull: bool) -> Result<Self, MalcevError> {
        for g in &generators {
            if g.rows() != n || g.cols() != n {
                return Err(MalcevError::Dimension {
                    expected: n,
                    found: g.rows(),
                });
            }
            if !g.is_unipotent() {
                return Err(MatrixError::NotUnipotent.into());
            }
        }
        let closure = lattice_closure(n, &generators)?;
        if closure.saturated && !allow_hull {
            return Err(MalcevError::Saturated);
        }
        Ok(Self {
            n,
            generators,
            lattice: closure.lattice,
            lattice_declared: !closure.saturated,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[ExactMatrix] {
        &self.generators
    }

    pub fn lattice(&self) -> &LieLattice {
        &self.lattice
    }

    pub fn lattice_declared(&self) -> bool {
        self.lattice_declared
    }

    pub fn law(&self) -> Result<BchLaw, MalcevError> {
        BchLaw::new(&self.lattice)
    }

    /// Moduli in `2..=bound` that are admissible for this lattice.
    pub fn admissible_moduli(&self, bound: u64) -> Result<Vec<u64>, MalcevError> {
        let law = self.law()?;
        Ok((2..=bound).filter(|&m| law.is_admissible(m)).collect())
    }
}
