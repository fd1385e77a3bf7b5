//! Multivariate Newton-Hensel certificates on square subsystems.
//!
//! If `f(x0) = 0 mod p^{2e+1}` for a square system `f` and the Jacobian
//! determinant at `x0` has valuation at most `e`, Newton iteration converges
//! `p`-adically to a root of `f` in `Z_p^M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::LocalError;
use crate::exactmat::{ExactMatrix, IntMatrix};
use crate::sysbuild::poly::valuation;
use crate::sysbuild::DiophantineSystem;

/// Equations and variables (0-based, by position) of a square subsystem;
/// every other variable is frozen at the point's value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub equations: Vec<usize>,
    pub variables: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HenselCertificate {
    pub prime: u64,
    /// Every system polynomial vanishes here modulo `p^(2e+1)`.
    #[serde(with = "crate::sysbuild::bigint_vec")]
    pub point: Vec<BigInt>,
    pub selection: Selection,
    pub e: u32,
    /// Valuation of the selected Jacobian minor, at most `e`.
    pub valuation: u32,
}

/// Partial derivatives at `x` of one polynomial: `(variable, value)`.
fn gradient(poly: &crate::sysbuild::Poly, x: &[BigInt]) -> Vec<(usize, BigInt)> {
    let mut grad: Vec<(usize, BigInt)> = Vec::new();
    for (mono, c) in poly.terms() {
        let powers = mono.powers();
        for (k, &(v, e)) in powers.iter().enumerate() {
            let mut t = c * BigInt::from(e);
            for (l, &(w, f)) in powers.iter().enumerate() {
                let exp = if l == k { f - 1 } else { f };
                if exp > 0 {
                    t *= num_traits::pow(x[w as usize].clone(), exp as usize);
                }
            }
            match grad.iter_mut().find(|(u, _)| *u == v as usize) {
                Some(slot) => slot.1 += t,
                None => grad.push((v as usize, t)),
            }
        }
    }
    grad
}

fn jacobian(system: &DiophantineSystem, x: &[BigInt], eqs: &[usize], vars: &[usize]) -> IntMatrix {
    let mut j = IntMatrix::zeros(eqs.len(), vars.len());
    for (r, &eq) in eqs.iter().enumerate() {
        for (v, value) in gradient(&system.polys[eq].poly, x) {
            if let Some(c) = vars.iter().position(|&u| u == v) {
                j[(r, c)] = value;
            }
        }
    }
    j
}

fn rational_valuation(q: &BigRational, p: u64) -> Option<i64> {
    let vn = valuation(q.numer(), p)? as i64;
    let vd = valuation(q.denom(), p).unwrap_or(0) as i64;
    Some(vn - vd)
}

/// Square subsystem chosen by Gaussian elimination on the full Jacobian at
/// `x0`, always pivoting on an entry of least `p`-adic valuation. Its size is
/// the rank of the Jacobian.
pub fn auto_selection(system: &DiophantineSystem, x0: &[BigInt], p: u64) -> Selection {
    let all_eqs: Vec<usize> = (0..system.polys.len()).collect();
    let all_vars: Vec<usize> = (0..system.variables.len()).collect();
    let j = jacobian(system, x0, &all_eqs, &all_vars);
    let mut m: Vec<Vec<BigRational>> = (0..j.rows())
        .map(|r| j.row(r).iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut rows_left: Vec<usize> = all_eqs;
    let mut cols_left: Vec<usize> = all_vars;
    let mut selection = Selection {
        equations: Vec::new(),
        variables: Vec::new(),
    };
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for &r in &rows_left {
            for &c in &cols_left {
                if let Some(v) = rational_valuation(&m[r][c], p) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, r, c));
                    }
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        selection.equations.push(pr);
        selection.variables.push(pc);
        rows_left.retain(|&r| r != pr);
        cols_left.retain(|&c| c != pc);
        let pivot_row = m[pr].clone();
        for &r in &rows_left {
            if m[r][pc].is_zero() {
                continue;
            }
            let factor = &m[r][pc] / &pivot_row[pc];
            for &c in &cols_left {
                let delta = &factor * &pivot_row[c];
                m[r][c] -= delta;
            }
            m[r][pc] = BigRational::zero();
        }
    }
    let mut pairs: Vec<(usize, usize)> = selection.equations.iter().copied().zip(selection.variables.iter().copied()).collect();
    pairs.sort_unstable();
    Selection {
        equations: pairs.iter().map(|&(e, _)| e).collect(),
        variables: {
            let mut v: Vec<usize> = pairs.iter().map(|&(_, v)| v).collect();
            v.sort_unstable();
            v
        },
    }
}

fn check_selection(system: &DiophantineSystem, sel: &Selection) -> Result<(), LocalError> {
    if sel.equations.len() != sel.variables.len() {
        return Err(LocalError::NonSquareSelection {
            equations: sel.equations.len(),
            variables: sel.variables.len(),
        });
    }
    if let Some(&e) = sel.equations.iter().find(|&&e| e >= system.polys.len()) {
        return Err(LocalError::SelectionOutOfRange(e));
    }
    if let Some(&v) = sel.variables.iter().find(|&&v| v >= system.variables.len()) {
        return Err(LocalError::SelectionOutOfRange(v));
    }
    Ok(())
}

/// Certificate when every polynomial vanishes at `x0` modulo `p^(2e+1)` and
/// the selected Jacobian minor has valuation at most `e`; `Ok(None)` when
/// only the valuation condition fails.
pub fn hensel_certificate(
    system: &DiophantineSystem,
    x0: &[BigInt],
    selection: &Selection,
    p: u64,
    e: u32,
) -> Result<Option<HenselCertificate>, LocalError> {
    check_selection(system, selection)?;
    let level = 2 * e + 1;
    let m = num_traits::pow(BigInt::from(p), level as usize);
    if system.polys.iter().any(|tp| !tp.poly.eval(x0).mod_floor(&m).is_zero()) {
        return Err(LocalError::VanishingFails { level });
    }
    let det = jacobian(system, x0, &selection.equations, &selection.variables)
        .det_int()
        .unwrap_or_else(|_| BigInt::zero());
    Ok(match valuation(&det, p) {
        Some(v) if v <= e => Some(HenselCertificate {
            prime: p,
            point: x0.iter().map(|x| x.mod_floor(&m)).collect(),
            selection: selection.clone(),
            e,
            valuation: v,
        }),
        _ => None,
    })
}

fn inverse_mod(b: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = b.extended_gcd(m);
    g.gcd.is_one().then(|| g.x.mod_floor(m))
}

/// Newton iteration on the selected subsystem until its polynomials vanish
/// modulo `p^level`; coordinates are kept reduced modulo a slightly higher
/// power of `p`.
pub fn newton_lift(
    system: &DiophantineSystem,
    x0: &[BigInt],
    selection: &Selection,
    p: u64,
    level: u32,
) -> Option<Vec<BigInt>> {
    check_selection(system, selection).ok()?;
    let pb = BigInt::from(p);
    let target = num_traits::pow(pb.clone(), level as usize);
    let j0 = jacobian(system, x0, &selection.equations, &selection.variables).det_int().ok()?;
    let v = valuation(&j0, p)?;
    let work = num_traits::pow(pb, (level + 2 * v + 2) as usize);
    let mut x: Vec<BigInt> = x0.to_vec();
    for _ in 0..64 {
        let f: Vec<BigInt> = selection.equations.iter().map(|&i| system.polys[i].poly.eval(&x)).collect();
        if f.iter().all(|y| y.mod_floor(&target).is_zero()) {
            return Some(x);
        }
        let j = jacobian(system, &x, &selection.equations, &selection.variables).to_rational();
        let inv = j.inverse().ok()?;
        let fr = ExactMatrix::from_fn(f.len(), 1, |i, _| BigRational::from_integer(f[i].clone()));
        let delta = inv.checked_mul(&fr).ok()?;
        for (k, &var) in selection.variables.iter().enumerate() {
            let d = &delta[(k, 0)];
            let d_inv = inverse_mod(d.denom(), &work)?;
            let step = (d.numer() * d_inv).mod_floor(&work);
            x[var] = (&x[var] - step).mod_floor(&work);
        }
    }
    None
}

/// Re-checks a certificate: the vanishing and valuation conditions at the
/// stored point, then Newton iteration to level `2(e+1)+4` with every
/// selected polynomial vanishing there.
pub fn reverify(system: &DiophantineSystem, cert: &HenselCertificate) -> bool {
    match hensel_certificate(system, &cert.point, &cert.selection, cert.prime, cert.e) {
        Ok(Some(c)) if c.valuation <= cert.e => {}
        _ => return false,
    }
    let level = 2 * (cert.e + 1) + 4;
    let Some(x) = newton_lift(system, &cert.point, &cert.selection, cert.prime, level) else {
        return false;
    };
    let m = num_traits::pow(BigInt::from(cert.prime), level as usize);
    cert.selection
        .equations
        .iter()
        .all(|&i| system.polys[i].poly.eval(&x).mod_floor(&m).is_zero())
        && x.iter().zip(&cert.point).all(|(a, b)| {
            // The root stays congruent to the point modulo p^(e+1).
            let q = num_traits::pow(BigInt::from(cert.prime), (cert.e + 1) as usize);
            (a - b).mod_floor(&q).is_zero() || (a - b).abs().is_zero()
        })
}
