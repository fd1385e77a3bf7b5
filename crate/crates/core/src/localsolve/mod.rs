//! Budgeted decision of `Z_p`-solvability for integer polynomial systems.
//!
//! Unsolvability is certified by an exhaustive search that finds no
//! solution modulo `p^k`; solvability by an exact integer witness or by a
//! Newton-Hensel certificate on a square subsystem.

mod hensel;
mod search;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sysbuild::{verify_witness, DiophantineSystem, SysError, Witness};
pub use hensel::{auto_selection, hensel_certificate, newton_lift, reverify, HenselCertificate, Selection};
pub use search::{solutions_mod, SolutionSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("{p}^{k} exceeds the supported modulus range")]
    ModulusTooLarge { p: u64, k: u32 },
    #[error("selection has {equations} equations and {variables} variables")]
    NonSquareSelection { equations: usize, variables: usize },
    #[error("selection refers to equation or variable {0} outside the system")]
    SelectionOutOfRange(usize),
    #[error("point does not satisfy every polynomial modulo p^{level}")]
    VanishingFails { level: u32 },
    #[error(transparent)]
    System(#[from] SysError),
}

/// Work limits for the search, counted in node expansions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Highest level `k` searched modulo `p^k`.
    pub max_level: u32,
    /// Node expansions allowed per prime, across all levels.
    pub max_nodes: u64,
    /// Solutions kept per level; the search stops early once reached.
    pub max_points: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_level: 6,
            max_nodes: 10_000_000,
            max_points: 64,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LocalConfig {
    pub budget: Budget,
    /// Candidate exact witnesses; one that verifies settles every prime.
    pub hints: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Integer assignment with all residuals exactly zero.
    Exact {
        #[serde(with = "crate::sysbuild::bigint_vec")]
        witness: Vec<BigInt>,
    },
    Hensel(HenselCertificate),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PrimeVerdict {
    CertifiedSolvable { certificate: Certificate },
    /// No solution modulo `p^level`.
    CertifiedUnsolvable { level: u32 },
    /// A Hensel certificate covers a square subsystem and the remaining
    /// equations vanish modulo `p^level` along the Newton iterates.
    ProbablySolvable { level: u32 },
    Unknown { nodes: u64 },
}

impl PrimeVerdict {
    pub fn is_certified_solvable(&self) -> bool {
        matches!(self, PrimeVerdict::CertifiedSolvable { .. })
    }

    pub fn is_certified_unsolvable(&self) -> bool {
        matches!(self, PrimeVerdict::CertifiedUnsolvable { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeReport {
    pub prime: u64,
    pub verdict: PrimeVerdict,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "overall", rename_all = "snake_case")]
pub enum Overall {
    LocallySolvableOnSet,
    NotLocallySolvable { prime: u64 },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSolvabilityReport {
    pub primes: Vec<u64>,
    pub verdicts: Vec<PrimeReport>,
    pub overall: Overall,
    /// Primes outside `primes` were not examined.
    pub primes_outside_set_examined: bool,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes up to 97 together with the prime factors of `extra` (factors of
/// entries too large to factor by trial division below `10^6` are skipped).
pub fn default_primes(extra: &[BigInt]) -> Vec<u64> {
    let mut primes: Vec<u64> = (2..=97).filter(|&p| is_prime(p)).collect();
    for x in extra {
        let mut x = x.clone();
        if x < BigInt::zero() {
            x = -x;
        }
        let mut d = 2u64;
        while x > BigInt::from(1) && d < 1_000_000 {
            let bd = BigInt::from(d);
            if x.is_multiple_of(&bd) {
                primes.push(d);
                while x.is_multiple_of(&bd) {
                    x /= &bd;
                }
            }
            d += 1;
        }
        if let Some(rest) = x.to_u64() {
            if rest > 1 && is_prime(rest) {
                primes.push(rest);
            }
        }
    }
    primes.sort_unstable();
    primes.dedup();
    primes
}

fn exact_hint(system: &DiophantineSystem, hints: &[Witness]) -> Option<Witness> {
    hints
        .iter()
        .filter(|w| w.modulus.is_none())
        .find(|w| verify_witness(system, w).is_ok_and(|r| r.all_zero))
        .cloned()
}

fn symmetric_lift(point: &[u128], modulus: u128) -> Vec<BigInt> {
    point
        .iter()
        .map(|&x| {
            if x > modulus / 2 {
                BigInt::from(x) - BigInt::from(modulus)
            } else {
                BigInt::from(x)
            }
        })
        .collect()
}

/// Interleaves exhaustive emptiness checks at increasing levels with
/// certificate attempts on the points found.
pub fn decide_prime(system: &DiophantineSystem, p: u64, config: &LocalConfig) -> Result<PrimeReport, LocalError> {
    if !is_prime(p) {
        return Err(LocalError::NotPrime(p));
    }
    if let Some(w) = exact_hint(system, &config.hints) {
        return Ok(exact_report(p, w.values, 0));
    }
    let budget = &config.budget;
    let mut nodes = 0u64;
    let mut probable: Option<u32> = None;
    for k in 1..=budget.max_level {
        let level_budget = Budget {
            max_nodes: budget.max_nodes.saturating_sub(nodes),
            ..budget.clone()
        };
        let set = match solutions_mod(system, p, k, &level_budget) {
            Ok(set) => set,
            Err(LocalError::ModulusTooLarge { .. }) => break,
            Err(e) => return Err(e),
        };
        nodes += set.nodes;
        if set.points.is_empty() {
            if set.exhaustive {
                return Ok(PrimeReport {
                    prime: p,
                    verdict: PrimeVerdict::CertifiedUnsolvable { level: k },
                    nodes,
                });
            }
            break;
        }
        let modulus = set.modulus();
        for point in &set.points {
            let lifted = symmetric_lift(point, modulus);
            let candidate = Witness::exact(lifted.clone());
            if verify_witness(system, &candidate)?.all_zero {
                return Ok(exact_report(p, lifted, nodes));
            }
            if k % 2 == 1 {
                let e = (k - 1) / 2;
                let x0: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
                let selection = auto_selection(system, &x0, p);
                if selection.equations.is_empty() {
                    continue;
                }
                if let Ok(Some(cert)) = hensel_certificate(system, &x0, &selection, p, e) {
                    if selection.equations.len() == system.polys.len() {
                        return Ok(PrimeReport {
                            prime: p,
                            verdict: PrimeVerdict::CertifiedSolvable {
                                certificate: Certificate::Hensel(cert),
                            },
                            nodes,
                        });
                    }
                    let level = 2 * (e + 1) + 4;
                    if probe_full_system(system, &cert, level) {
                        probable = Some(probable.map_or(level, |l| l.max(level)));
                    }
                }
            }
        }
        if !set.exhaustive {
            break;
        }
    }
    let verdict = match probable {
        Some(level) => PrimeVerdict::ProbablySolvable { level },
        None => PrimeVerdict::Unknown { nodes },
    };
    Ok(PrimeReport {
        prime: p,
        verdict,
        nodes,
    })
}

fn exact_report(p: u64, witness: Vec<BigInt>, nodes: u64) -> PrimeReport {
    PrimeReport {
        prime: p,
        verdict: PrimeVerdict::CertifiedSolvable {
            certificate: Certificate::Exact { witness },
        },
        nodes,
    }
}

/// Newton-lifts the certified subsystem to `level` and checks every system
/// polynomial there.
fn probe_full_system(system: &DiophantineSystem, cert: &HenselCertificate, level: u32) -> bool {
    let Some(x) = newton_lift(system, &cert.point, &cert.selection, cert.prime, level) else {
        return false;
    };
    let m = num_traits::pow(BigInt::from(cert.prime), level as usize);
    system.polys.iter().all(|tp| tp.poly.eval(&x).mod_floor(&m).is_zero())
}

/// Runs `decide_prime` for each prime (in parallel) and aggregates.
pub fn decide_local(
    system: &DiophantineSystem,
    primes: &[u64],
    config: &LocalConfig,
) -> Result<LocalSolvabilityReport, LocalError> {
    if let Some(&bad) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(LocalError::NotPrime(bad));
    }
    let verdicts: Vec<PrimeReport> = match exact_hint(system, &config.hints) {
        Some(w) => primes.iter().map(|&p| exact_report(p, w.values.clone(), 0)).collect(),
        None => {
            let stripped = LocalConfig {
                budget: config.budget.clone(),
                hints: Vec::new(),
            };
            primes
                .par_iter()
                .map(|&p| decide_prime(system, p, &stripped))
                .collect::<Result<_, _>>()?
        }
    };
    let overall = aggregate(&verdicts);
    Ok(LocalSolvabilityReport {
        primes: primes.to_vec(),
        verdicts,
        overall,
        primes_outside_set_examined: false,
    })
}

fn aggregate(verdicts: &[PrimeReport]) -> Overall {
    if let Some(r) = verdicts.iter().find(|r| r.verdict.is_certified_unsolvable()) {
        Overall::NotLocallySolvable { prime: r.prime }
    } else if !verdicts.is_empty() && verdicts.iter().all(|r| r.verdict.is_certified_solvable()) {
        Overall::LocallySolvableOnSet
    } else {
        Overall::Inconclusive
    }
}

#[cfg(test)]
mod tests;
