//! Instance parsing, quotient isomorphisms, and the two-procedure decider.
//!
//! Procedure 1 looks for an invariant that separates the completions;
//! procedure 2 looks for a quotient isomorphism `theta` whose system
//! `F(theta)` is locally solvable. `decide` advances them in fixed
//! round-robin slices and stops at the first certified answer.
//!
//! Verdicts that use `N` (lattice invariants, `G/N`, the systems) are
//! conditional on every isomorphism of completions mapping the closure of
//! `N` onto that of `N^dag`. The instance declares this; it holds trivially
//! when `G = N` on both sides.

mod instance;
mod procedures;
mod quotient;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use instance::{parse_instance, parse_matrix, relation_matrix, IsoInstance, Side, ThetaDecl};
pub use procedures::{
    lie_pass, presentation_invariants, prime_set, theta_system, LieReport, NegativeCertificate, P1Outcome, P1Step, P2Outcome,
    PositiveReport, Procedure1, Procedure2, ThetaData, ThetaKill, ThetaOutcome, ThetaRecord, FINGERPRINT_ORDER_CAP,
};
pub use quotient::{abelianization_coords, enumerate_theta, theta_from_lifts, AbelianQuotient, ThetaSpec, ThetaStream};

use crate::localsolve::{Budget, LocalError};
use crate::malcev::MalcevError;
use crate::sysbuild::SysError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("[{side}] {message}")]
    Invalid { side: &'static str, message: String },
    #[error("torsion subgroup of the quotient is too large to enumerate")]
    TorsionTooLarge,
    #[error(transparent)]
    Malcev(MalcevError),
    #[error(transparent)]
    System(#[from] SysError),
    #[error(transparent)]
    Local(#[from] LocalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Only the full system per `theta`.
    Full,
    /// The bracket-transport system first; an obstruction there discards
    /// every `theta` at once.
    LieFirst,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecideConfig {
    /// Entry bound for free-part matrices of `theta`.
    pub height: u32,
    /// `None` means the primes up to 97 together with those dividing `n!`,
    /// `n'!`, the lattice denominators and the determinants of the
    /// constants of each `theta`.
    pub primes: Option<Vec<u64>>,
    /// Fingerprint moduli are drawn from `2..=moduli_bound`.
    pub moduli_bound: u64,
    /// Number of round-robin rounds; each advances both procedures by one
    /// step.
    pub slices: usize,
    pub budget: Budget,
    pub mode: Mode,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self {
            height: 1,
            primes: None,
            moduli_bound: 8,
            slices: 64,
            budget: Budget::default(),
            mode: Mode::LieFirst,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ProfinitelyIsomorphic(Box<PositiveReport>),
    NotProfinitelyIsomorphic { certificate: NegativeCertificate },
    Undetermined,
}

impl Verdict {
    /// Exit status convention: 0 positive, 1 negative, 2 undetermined.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::ProfinitelyIsomorphic(_) => 0,
            Verdict::NotProfinitelyIsomorphic { .. } => 1,
            Verdict::Undetermined => 2,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BudgetsUsed {
    pub rounds: usize,
    pub procedure1_steps: usize,
    pub procedure1_exhausted: bool,
    pub thetas_examined: usize,
    pub procedure2_exhausted: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// The fitting hypothesis was declared rather than automatic.
    pub fitting_hypothesis_declared: bool,
    pub config: DecideConfig,
    pub budgets: BudgetsUsed,
    pub lie: Option<LieReport>,
    pub thetas: Vec<ThetaRecord>,
}

/// Round-robin interleaving of the two procedures: in each round,
/// procedure 1 runs one step, then procedure 2. The first certified stop
/// wins; running out of rounds, or both procedures exhausting, gives
/// `Undetermined`.
pub fn decide(inst: &IsoInstance, config: &DecideConfig) -> Result<Decision, DecideError> {
    let mut p1 = Procedure1::new(inst, config.moduli_bound)?;
    let mut p2 = Procedure2::new(inst, config)?;
    let mut budgets = BudgetsUsed::default();
    let mut verdict = Verdict::Undetermined;
    let (mut p1_done, mut p2_done) = (false, false);
    while budgets.rounds < config.slices && !(p1_done && p2_done) {
        budgets.rounds += 1;
        if !p1_done {
            match p1.step()? {
                P1Outcome::Mismatch(certificate) => {
                    verdict = Verdict::NotProfinitelyIsomorphic { certificate };
                    break;
                }
                P1Outcome::Exhausted => p1_done = true,
                P1Outcome::Continue => {}
            }
        }
        if !p2_done {
            match p2.step()? {
                P2Outcome::Positive(report) => {
                    verdict = Verdict::ProfinitelyIsomorphic(report);
                    break;
                }
                P2Outcome::Dead(Some(certificate)) => {
                    verdict = Verdict::NotProfinitelyIsomorphic { certificate };
                    break;
                }
                P2Outcome::Dead(None) | P2Outcome::Exhausted => p2_done = true,
                P2Outcome::Continue => {}
            }
        }
    }
    budgets.procedure1_steps = p1.steps_done();
    budgets.procedure1_exhausted = p1.is_exhausted();
    budgets.thetas_examined = p2.records.len();
    budgets.procedure2_exhausted = p2.is_finished();
    budgets.nodes = p2.nodes;
    Ok(Decision {
        verdict,
        fitting_hypothesis_declared: inst.profinite_fitting,
        config: config.clone(),
        budgets,
        lie: p2.lie.take(),
        thetas: std::mem::take(&mut p2.records),
    })
}
