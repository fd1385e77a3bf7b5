//! The two procedures, each advanced one step at a time so that `decide`
//! can interleave them deterministically.

use std::collections::BTreeMap;

use serde::Serialize;

use super::instance::{relation_matrix, IsoInstance, Side};
use super::quotient::{enumerate_theta, theta_from_lifts, ThetaSpec, ThetaStream};
use super::{DecideConfig, DecideError, Mode};
use crate::exactmat::smith_invariants;
use crate::localsolve::{decide_local, decide_prime, default_primes, LocalConfig, LocalSolvabilityReport, Overall, PrimeReport, PrimeVerdict};
use crate::malcev::{fingerprint, fingerprint_compare, Comparison, Divergence, MalcevError, MAX_QUOTIENT_ORDER};
use crate::sysbuild::{
    build_full_system, build_lie_system, find_exact_witness, find_lie_witness, DiophantineSystem, FullSystemInput,
    Witness, WitnessHints,
};
use crate::BigInt;
use crate::words::{eval_word, specialize_constants, SpecializationInput, Word};

/// Why the completions are not isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NegativeCertificate {
    /// `G^ab` differs; needs no hypothesis.
    PresentationAbelianization { left: String, right: String },
    /// Hirsch lengths of `N` and `N^dag` differ.
    LatticeRank { left: usize, right: usize },
    /// `G/N` and `G^dag/N^dag` differ.
    QuotientInvariants { left: String, right: String },
    /// `N/exp(mL)` and `N^dag/exp(mL')` differ.
    Fingerprint { divergence: Divergence },
    /// The bracket-transport system has no solution over `Z_p`, so no
    /// `theta` extends.
    LieObstruction { prime: u64, level: u32 },
    /// Each quotient isomorphism fails at some prime; the enumeration was
    /// complete.
    AllThetaUnsolvable { killed: Vec<ThetaKill> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaKill {
    pub theta: usize,
    pub prime: u64,
    pub level: u32,
}

/// One step of procedure 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum P1Step {
    PresentationAbelianization,
    LatticeRank,
    QuotientInvariants,
    Fingerprint { modulus: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum P1Outcome {
    Mismatch(NegativeCertificate),
    Continue,
    Exhausted,
}

pub struct Procedure1<'a> {
    inst: &'a IsoInstance,
    steps: Vec<P1Step>,
    next: usize,
}

/// Largest quotient `N/exp(mL)` fingerprinted by the decider.
pub const FINGERPRINT_ORDER_CAP: u64 = 1 << 12;

fn quotient_fits(m: u64, r: usize) -> bool {
    u32::try_from(r)
        .ok()
        .and_then(|r| m.checked_pow(r))
        .is_some_and(|order| order <= FINGERPRINT_ORDER_CAP.min(MAX_QUOTIENT_ORDER))
}

impl<'a> Procedure1<'a> {
    /// Schedule: presentation abelianization; then, under the fitting
    /// hypothesis, lattice rank, `G/N` invariants, and fingerprints over the
    /// moduli in `2..=moduli_bound` admissible on both sides, ascending.
    pub fn new(inst: &'a IsoInstance, moduli_bound: u64) -> Result<Self, DecideError> {
        let mut steps = vec![P1Step::PresentationAbelianization];
        if inst.hypothesis_holds() {
            steps.push(P1Step::LatticeRank);
            steps.push(P1Step::QuotientInvariants);
            let (a, b) = (&inst.g.group, &inst.gdag.group);
            let ma = a.admissible_moduli(moduli_bound)?;
            let mb = b.admissible_moduli(moduli_bound)?;
            let (ra, rb) = (a.lattice().rank(), b.lattice().rank());
            steps.extend(
                ma.into_iter()
                    .filter(|m| mb.contains(m) && quotient_fits(*m, ra) && quotient_fits(*m, rb))
                    .map(|modulus| P1Step::Fingerprint { modulus }),
            );
        }
        Ok(Self { inst, steps, next: 0 })
    }

    pub fn steps_done(&self) -> usize {
        self.next
    }

    pub fn is_exhausted(&self) -> bool {
        self.next >= self.steps.len()
    }

    pub fn step(&mut self) -> Result<P1Outcome, DecideError> {
        let Some(step) = self.steps.get(self.next).cloned() else {
            return Ok(P1Outcome::Exhausted);
        };
        self.next += 1;
        let (a, b) = (&self.inst.g, &self.inst.gdag);
        let cert = match step {
            P1Step::PresentationAbelianization => {
                let (left, right) = (presentation_invariants(a), presentation_invariants(b));
                (left != right).then(|| NegativeCertificate::PresentationAbelianization {
                    left: left.to_string(),
                    right: right.to_string(),
                })
            }
            P1Step::LatticeRank => {
                let (left, right) = (a.group.lattice().rank(), b.group.lattice().rank());
                (left != right).then_some(NegativeCertificate::LatticeRank { left, right })
            }
            P1Step::QuotientInvariants => {
                let (left, right) = (&a.quotient.invariants, &b.quotient.invariants);
                (left != right).then(|| NegativeCertificate::QuotientInvariants {
                    left: left.to_string(),
                    right: right.to_string(),
                })
            }
            P1Step::Fingerprint { modulus } => {
                let fa = fingerprint(&a.group, &[modulus])?;
                let fb = fingerprint(&b.group, &[modulus])?;
                match fingerprint_compare(&fa, &fb)? {
                    Comparison::Match => None,
                    Comparison::Diverges(divergence) => Some(NegativeCertificate::Fingerprint { divergence }),
                }
            }
        };
        Ok(match cert {
            Some(c) => P1Outcome::Mismatch(c),
            None if self.is_exhausted() => P1Outcome::Exhausted,
            None => P1Outcome::Continue,
        })
    }
}

/// Invariants of `G^ab` from the relators alone.
pub fn presentation_invariants(side: &Side) -> crate::exactmat::SmithInvariants {
    let rows: Vec<&Word> = side.relators.iter().collect();
    smith_invariants(&relation_matrix(side.d(), &rows))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ThetaOutcome {
    Solvable,
    Unsolvable { prime: u64, level: u32 },
    Inconclusive,
    /// The lifts gave inconsistent constants; the message says which.
    LiftFailed { message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaRecord {
    pub theta: ThetaSpec,
    pub outcome: ThetaOutcome,
    pub nodes: u64,
}

/// A positive answer for one `theta`.
#[derive(Clone, Debug, Serialize)]
pub struct PositiveReport {
    pub theta: ThetaSpec,
    pub report: LocalSolvabilityReport,
    /// Exact witness by variable name, when one was found.
    pub witness: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LieReport {
    pub verdicts: Vec<PrimeReport>,
    pub witness_found: bool,
}

pub enum P2Outcome {
    Positive(Box<PositiveReport>),
    /// Procedure 2 can never succeed; carries a certificate when the
    /// obstruction proves non-isomorphism under the fitting hypothesis.
    Dead(Option<NegativeCertificate>),
    Continue,
    Exhausted,
}

pub struct Procedure2<'a> {
    inst: &'a IsoInstance,
    config: &'a DecideConfig,
    stream: ThetaStream,
    lie_done: bool,
    pub lie: Option<LieReport>,
    pub records: Vec<ThetaRecord>,
    pub nodes: u64,
    finished: bool,
}

impl<'a> Procedure2<'a> {
    pub fn new(inst: &'a IsoInstance, config: &'a DecideConfig) -> Result<Self, DecideError> {
        let stream = match &inst.lifts {
            Some(lifts) => theta_from_lifts(&inst.g, &inst.gdag, lifts)?,
            None => enumerate_theta(&inst.g, &inst.gdag, config.height, inst.theta.as_ref())?,
        };
        Ok(Self {
            inst,
            config,
            stream,
            lie_done: config.mode == Mode::Full,
            lie: None,
            records: Vec::new(),
            nodes: 0,
            finished: false,
        })
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn step(&mut self) -> Result<P2Outcome, DecideError> {
        if self.finished {
            return Ok(P2Outcome::Exhausted);
        }
        if !self.lie_done {
            self.lie_done = true;
            let (report, killed) = lie_pass(self.inst, self.config)?;
            self.nodes += report.verdicts.iter().map(|r| r.nodes).sum::<u64>();
            self.lie = Some(report);
            if let Some((prime, level)) = killed {
                self.finished = true;
                let cert = self
                    .inst
                    .hypothesis_holds()
                    .then_some(NegativeCertificate::LieObstruction { prime, level });
                return Ok(P2Outcome::Dead(cert));
            }
            return Ok(P2Outcome::Continue);
        }
        let Some(theta) = self.stream.next() else {
            self.finished = true;
            return Ok(self.exhausted());
        };
        let (record, positive) = process_theta(self.inst, self.config, theta)?;
        self.nodes += record.nodes;
        self.records.push(record);
        Ok(match positive {
            Some(p) => {
                self.finished = true;
                P2Outcome::Positive(Box::new(p))
            }
            None => P2Outcome::Continue,
        })
    }

    fn exhausted(&self) -> P2Outcome {
        let killed: Option<Vec<ThetaKill>> = self
            .records
            .iter()
            .map(|r| match r.outcome {
                ThetaOutcome::Unsolvable { prime, level } => Some(ThetaKill {
                    theta: r.theta.index,
                    prime,
                    level,
                }),
                _ => None,
            })
            .collect();
        match killed {
            Some(killed) if self.stream.complete && self.inst.hypothesis_holds() => {
                P2Outcome::Dead(Some(NegativeCertificate::AllThetaUnsolvable { killed }))
            }
            _ => P2Outcome::Exhausted,
        }
    }
}

fn local_config(config: &DecideConfig, hints: Vec<Witness>) -> LocalConfig {
    LocalConfig {
        budget: config.budget.clone(),
        hints,
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// The configured primes, or the default set for this instance with the
/// prime factors of `extra` added. Sorted ascending.
pub fn prime_set(inst: &IsoInstance, config: &DecideConfig, extra: &[BigInt]) -> Vec<u64> {
    let mut primes = match &config.primes {
        Some(p) => p.clone(),
        None => {
            let mut e = vec![factorial(inst.g.n), factorial(inst.gdag.n)];
            e.push(inst.g.group.lattice().denominator().clone());
            e.push(inst.gdag.group.lattice().denominator().clone());
            e.extend_from_slice(extra);
            default_primes(&e)
        }
    };
    primes.sort_unstable();
    primes.dedup();
    primes
}

/// Bracket transport between the two lattices, primes in ascending order,
/// stopping at the first certified obstruction.
pub fn lie_pass(inst: &IsoInstance, config: &DecideConfig) -> Result<(LieReport, Option<(u64, u32)>), DecideError> {
    let (la, lb) = (inst.g.group.lattice(), inst.gdag.group.lattice());
    let sys = build_lie_system(la, lb)?;
    let hint = find_lie_witness(&sys, la, lb);
    let witness_found = hint.is_some();
    let local = local_config(config, hint.into_iter().collect());
    let primes = prime_set(inst, config, &[]);
    let mut verdicts = Vec::new();
    for p in primes {
        let report = decide_prime(&sys, p, &local)?;
        let killed = match report.verdict {
            PrimeVerdict::CertifiedUnsolvable { level } => Some((p, level)),
            _ => None,
        };
        verdicts.push(report);
        if killed.is_some() {
            return Ok((LieReport { verdicts, witness_found }, killed));
        }
    }
    Ok((LieReport { verdicts, witness_found }, None))
}

/// `F(theta)` for one quotient isomorphism.
pub fn theta_system(inst: &IsoInstance, theta: &ThetaSpec) -> Result<Result<ThetaData, String>, DecideError> {
    let (a, b) = (&inst.g, &inst.gdag);
    let constants = match specialize_constants(SpecializationInput {
        g_gens: &a.gens,
        relators: &a.relators,
        n_words: &a.n_words,
        lifts: &theta.lifts,
        gdag_gens: &b.gens,
        lattice: a.group.lattice(),
        lattice_dag: b.group.lattice(),
    }) {
        Ok(c) => c,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let lifts = theta
        .lifts
        .iter()
        .map(|w| eval_word(w, &b.gens))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| DecideError::Invalid {
            side: "lifts",
            message: e.to_string(),
        })?;
    let input = FullSystemInput {
        lattice: a.group.lattice(),
        lattice_dag: b.group.lattice(),
        d: a.d(),
        s: a.n_words.len(),
        constants: Some(&constants),
    };
    let system = build_full_system(input)?;
    let witness = find_exact_witness(
        &system,
        &WitnessHints {
            input,
            g_gens: &a.gens,
            lifts: &lifts,
        },
    );
    let mut determinants = Vec::new();
    let words = constants.relators.iter().chain(&constants.subgroup);
    let matrices = words
        .flat_map(|w| w.factors.iter().map(|f| &f.conjugator).chain(std::iter::once(&w.tail)))
        .chain(&constants.a);
    for m in matrices {
        if let Ok(d) = m.det() {
            determinants.push(d.numer().clone());
            determinants.push(d.denom().clone());
        }
    }
    Ok(Ok(ThetaData {
        system,
        witness,
        determinants,
    }))
}

pub struct ThetaData {
    pub system: DiophantineSystem,
    pub witness: Option<Witness>,
    /// Numerators and denominators of the determinants of the constants.
    pub determinants: Vec<BigInt>,
}

fn process_theta(
    inst: &IsoInstance,
    config: &DecideConfig,
    theta: ThetaSpec,
) -> Result<(ThetaRecord, Option<PositiveReport>), DecideError> {
    let data = match theta_system(inst, &theta)? {
        Ok(d) => d,
        Err(message) => {
            let record = ThetaRecord {
                theta,
                outcome: ThetaOutcome::LiftFailed { message },
                nodes: 0,
            };
            return Ok((record, None));
        }
    };
    let local = local_config(config, data.witness.iter().cloned().collect());
    let primes = prime_set(inst, config, &data.determinants);
    let report = decide_local(&data.system, &primes, &local)?;
    let nodes = report.verdicts.iter().map(|r| r.nodes).sum();
    let outcome = match report.overall {
        Overall::LocallySolvableOnSet => ThetaOutcome::Solvable,
        Overall::NotLocallySolvable { prime } => {
            let level = report
                .verdicts
                .iter()
                .find_map(|r| match r.verdict {
                    PrimeVerdict::CertifiedUnsolvable { level } if r.prime == prime => Some(level),
                    _ => None,
                })
                .expect("unsolvable prime has a verdict");
            ThetaOutcome::Unsolvable { prime, level }
        }
        Overall::Inconclusive => ThetaOutcome::Inconclusive,
    };
    let positive = (outcome == ThetaOutcome::Solvable).then(|| PositiveReport {
        theta: theta.clone(),
        report: report.clone(),
        witness: data.witness.as_ref().map(|w| {
            w.named(&data.system)
                .into_iter()
                .map(|(k, v)| (k, v.to_string()))
                .collect()
        }),
    });
    Ok((ThetaRecord { theta, outcome, nodes }, positive))
}

impl From<MalcevError> for DecideError {
    fn from(e: MalcevError) -> Self {
        DecideError::Malcev(e)
    }
}
