//! Canonical invariants of the finite quotients `N / exp(mL)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group::{abelianization_invariants, exponent, nilpotency_class, order_histogram, FiniteGroup};
use super::quotient::{BchLaw, LatticeQuotient};
use super::{MalcevError, TGroupRep};

/// Invariants of one quotient `N / exp(mL)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientInvariants {
    pub modulus: u64,
    pub order: u64,
    pub nilpotency_class: Option<usize>,
    pub exponent: u64,
    pub abelian_invariants: Vec<u64>,
    pub order_histogram: BTreeMap<u64, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub quotients: Vec<QuotientInvariants>,
}

impl Fingerprint {
    pub fn moduli(&self) -> Vec<u64> {
        self.quotients.iter().map(|q| q.modulus).collect()
    }
}

pub fn quotient_invariants(law: &BchLaw, modulus: u64) -> Result<QuotientInvariants, MalcevError> {
    let q = LatticeQuotient::new(law, modulus)?;
    let hist = order_histogram(&q);
    Ok(QuotientInvariants {
        modulus,
        order: q.order() as u64,
        nilpotency_class: nilpotency_class(&q),
        exponent: exponent(&hist),
        abelian_invariants: abelianization_invariants(&q),
        order_histogram: hist,
    })
}

/// Fingerprint over `moduli`, computed in parallel; the result is ordered
/// like `moduli`.
pub fn fingerprint(group: &TGroupRep, moduli: &[u64]) -> Result<Fingerprint, MalcevError> {
    let law = group.law()?;
    let quotients = moduli
        .par_iter()
        .map(|&m| quotient_invariants(&law, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Fingerprint { quotients })
}

/// First invariant on which two fingerprints differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub modulus: u64,
    pub invariant: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    Match,
    Diverges(Divergence),
}

/// Compares modulus by modulus in ascending order; within a modulus the
/// order is: order, class, exponent, abelianization, order statistics.
pub fn fingerprint_compare(f: &Fingerprint, g: &Fingerprint) -> Result<Comparison, MalcevError> {
    if f.moduli() != g.moduli() {
        return Err(MalcevError::ModuliMismatch);
    }
    let mut pairs: Vec<(&QuotientInvariants, &QuotientInvariants)> =
        f.quotients.iter().zip(&g.quotients).collect();
    pairs.sort_by_key(|(a, _)| a.modulus);
    for (a, b) in pairs {
        let checks: [(&str, String, String); 5] = [
            ("order", a.order.to_string(), b.order.to_string()),
            ("nilpotency class", show_class(a.nilpotency_class), show_class(b.nilpotency_class)),
            ("exponent", a.exponent.to_string(), b.exponent.to_string()),
            ("abelian invariants", format!("{:?}", a.abelian_invariants), format!("{:?}", b.abelian_invariants)),
            ("element orders", format!("{:?}", a.order_histogram), format!("{:?}", b.order_histogram)),
        ];
        for (name, left, right) in checks {
            if left != right {
                return Ok(Comparison::Diverges(Divergence {
                    modulus: a.modulus,
                    invariant: name.to_string(),
                    left,
                    right,
                }));
            }
        }
    }
    Ok(Comparison::Match)
}

fn show_class(c: Option<usize>) -> String {
    c.map_or_else(|| "not nilpotent".to_string(), |c| c.to_string())
}
