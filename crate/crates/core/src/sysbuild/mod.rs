//! The Diophantine system `F(theta)` whose solvability over every `Z_p` is
//! equivalent to an isomorphism of profinite completions extending `theta`,
//! plus the smaller bracket-transport system on the lattices alone.

mod pmat;
pub mod poly;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmat::{unipotent_log, ExactMatrix, MatrixError};
use crate::malcev::{structure_constants, LieLattice, MalcevError};
use crate::words::SpecializedConstants;
use pmat::{unipotent_inverse_series, unipotent_log_series, PMat};
pub use poly::{Monomial, Poly};
pub use text::{parse_system, serialize_system};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SysError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Malcev(#[from] MalcevError),
    #[error("the good case requires specialized constants")]
    MissingConstants,
    #[error("witness assigns {found} values, system has {expected} variables")]
    IncompleteAssignment { expected: usize, found: usize },
    #[error("variable `{0}` is not in the roster")]
    UnknownVariable(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// Equation group of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Beq,
    Ceq,
    #[serde(rename = "e2")]
    E2,
    #[serde(rename = "e3")]
    E3,
    #[serde(rename = "e4")]
    E4,
    #[serde(rename = "const")]
    Const,
}

impl Tag {
    pub const ALL: [Tag; 6] = [Tag::Beq, Tag::Ceq, Tag::E2, Tag::E3, Tag::E4, Tag::Const];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Beq => "Beq",
            Tag::Ceq => "Ceq",
            Tag::E2 => "e2",
            Tag::E3 => "e3",
            Tag::E4 => "e4",
            Tag::Const => "const",
        }
    }

    pub fn parse(s: &str) -> Option<Tag> {
        Tag::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub n: usize,
    pub nprime: usize,
    pub r: usize,
    pub rprime: usize,
    pub d: usize,
    pub s: usize,
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedPoly {
    pub tag: Tag,
    pub poly: Poly,
}

/// Integer unknowns (by roster index) and integer polynomial equations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiophantineSystem {
    pub meta: Meta,
    pub variables: Vec<String>,
    pub polys: Vec<TaggedPoly>,
}

impl DiophantineSystem {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.polys.iter().filter(|p| p.tag == tag).count()
    }

    pub fn max_degree(&self) -> u32 {
        self.polys.iter().map(|p| p.poly.degree()).max().unwrap_or(0)
    }
}

/// Variable layout of the full system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Roster {
    pub n: usize,
    pub nprime: usize,
    pub r: usize,
    pub rprime: usize,
    pub d: usize,
}

impl Roster {
    pub fn len(&self) -> usize {
        self.n * self.nprime + self.r * self.rprime + self.d * (self.nprime * self.nprime + self.rprime) + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Indices below are 0-based; names are 1-based.
    pub fn h(&self, i: usize, j: usize) -> u32 {
        (i * self.nprime + j) as u32
    }

    pub fn z(&self, i: usize, j: usize) -> u32 {
        (self.n * self.nprime + i * self.rprime + j) as u32
    }

    pub fn xi(&self, k: usize, i: usize, j: usize) -> u32 {
        let base = self.n * self.nprime + self.r * self.rprime;
        (base + k * self.nprime * self.nprime + i * self.nprime + j) as u32
    }

    pub fn lam(&self, k: usize, j: usize) -> u32 {
        let base = self.n * self.nprime + self.r * self.rprime + self.d * self.nprime * self.nprime;
        (base + k * self.rprime + j) as u32
    }

    pub fn eta0(&self) -> u32 {
        (self.len() - 2) as u32
    }

    pub fn zeta0(&self) -> u32 {
        (self.len() - 1) as u32
    }

    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for i in 1..=self.n {
            for j in 1..=self.nprime {
                names.push(format!("H_{i}_{j}"));
            }
        }
        for i in 1..=self.r {
            for j in 1..=self.rprime {
                names.push(format!("Z_{i}_{j}"));
            }
        }
        for k in 1..=self.d {
            for i in 1..=self.nprime {
                for j in 1..=self.nprime {
                    names.push(format!("Xi{k}_{i}_{j}"));
                }
            }
        }
        for k in 1..=self.d {
            for j in 1..=self.rprime {
                names.push(format!("lam{k}_{j}"));
            }
        }
        names.push("eta0".into());
        names.push("zeta0".into());
        names
    }

    fn block(&self, rows: usize, cols: usize, first: u32) -> PMat {
        PMat::variables(rows, cols, first)
    }
}

/// Everything `F(theta)` depends on.
#[derive(Clone, Copy, Debug)]
pub struct FullSystemInput<'a> {
    pub lattice: &'a LieLattice,
    pub lattice_dag: &'a LieLattice,
    /// Number of generators `d` and of subgroup words `s` of `G`.
    pub d: usize,
    pub s: usize,
    /// Required in the good case.
    pub constants: Option<&'a SpecializedConstants>,
}

fn meta_for(input: &FullSystemInput<'_>) -> Meta {
    let n = input.lattice.dim();
    let nprime = input.lattice_dag.dim();
    let r = input.lattice.rank();
    let rprime = input.lattice_dag.rank();
    Meta {
        n,
        nprime,
        r,
        rprime,
        d: input.d,
        s: input.s,
        good: n == nprime && r == rprime,
    }
}

fn push_all(polys: &mut Vec<TaggedPoly>, tag: Tag, eqs: Vec<Poly>) {
    polys.extend(eqs.into_iter().map(|poly| TaggedPoly { tag, poly }));
}

/// Builds `F(theta)` for the lifts already folded into `input.constants`.
///
/// Outside the good case (`n != n'` or `r != r'`) the roster is still
/// emitted but the only equation is the constant contradiction `1 = 0`.
pub fn build_full_system(input: FullSystemInput<'_>) -> Result<DiophantineSystem, SysError> {
    let meta = meta_for(&input);
    let roster = Roster {
        n: meta.n,
        nprime: meta.nprime,
        r: meta.r,
        rprime: meta.rprime,
        d: meta.d,
    };
    let variables = roster.names();
    if !meta.good {
        return Ok(DiophantineSystem {
            meta,
            variables,
            polys: vec![TaggedPoly {
                tag: Tag::Const,
                poly: Poly::constant(1),
            }],
        });
    }
    let constants = input.constants.ok_or(SysError::MissingConstants)?;
    let (n, np) = (meta.n, meta.nprime);
    let h = roster.block(n, np, roster.h(0, 0));
    let xi: Vec<PMat> = (0..meta.d).map(|k| roster.block(np, np, roster.xi(k, 0, 0))).collect();
    let xi_inv: Vec<PMat> = xi.iter().map(unipotent_inverse_series).collect();

    let derived_product = |factors: &[crate::words::SpecializedFactor]| -> Result<PMat, SysError> {
        let mut acc = PMat::identity(np);
        for f in factors {
            let core = if f.inverse {
                &xi_inv[f.target - 1]
            } else {
                &xi[f.target - 1]
            };
            if f.conjugator.is_identity() {
                acc = acc.mul(core);
            } else {
                let y = PMat::from_const(&f.conjugator);
                let y_inv = PMat::from_const(&f.conjugator.inverse()?);
                acc = acc.mul(&y_inv).mul(core).mul(&y);
            }
        }
        Ok(acc)
    };

    let mut polys = Vec::new();
    for w in &constants.relators {
        let lhs = derived_product(&w.factors)?.mul(&PMat::from_const(&w.tail));
        push_all(&mut polys, Tag::Beq, lhs.equations(&PMat::identity(np)));
    }
    for (word, a) in constants.subgroup.iter().zip(&constants.a) {
        let lhs = h.mul(&derived_product(&word.factors)?).mul(&PMat::from_const(&word.tail));
        let rhs = PMat::from_const(a).mul(&h);
        push_all(&mut polys, Tag::Ceq, lhs.equations(&rhs));
    }

    let one = PMat::identity(1);
    let eta0 = PMat::variables(1, 1, roster.eta0());
    push_all(&mut polys, Tag::E2, eta0.mul(&h.det()).equations(&one));
    let z = roster.block(meta.r, meta.rprime, roster.z(0, 0));
    let zeta0 = PMat::variables(1, 1, roster.zeta0());
    push_all(&mut polys, Tag::E2, zeta0.mul(&z.det()).equations(&one));

    let basis = input.lattice.basis();
    let basis_dag = input.lattice_dag.basis();
    for (i, e) in basis.iter().enumerate() {
        let weights: Vec<Poly> = (0..meta.rprime).map(|j| Poly::var(roster.z(i, j))).collect();
        let transported = PMat::combination(&weights, &basis_dag);
        let lhs = PMat::from_const(e).mul(&h);
        let rhs = h.mul(&transported);
        push_all(&mut polys, Tag::E3, lhs.equations(&rhs));
    }
    for (k, x) in xi.iter().enumerate() {
        let weights: Vec<Poly> = (0..meta.rprime).map(|j| Poly::var(roster.lam(k, j))).collect();
        let rhs = PMat::combination(&weights, &basis_dag);
        push_all(&mut polys, Tag::E4, unipotent_log_series(x).equations(&rhs));
    }
    Ok(DiophantineSystem { meta, variables, polys })
}

/// Bracket-transport system in `Z` (`r x r'`) and `zeta0`:
/// `zeta0 det Z = 1` (tag `e2`) and, for `i < j` and every `m`,
/// `sum_{a,b} z_ia z_jb c'_abm = sum_k c_ijk z_km` (tag `e3`).
pub fn build_lie_system(lattice: &LieLattice, lattice_dag: &LieLattice) -> Result<DiophantineSystem, SysError> {
    let (r, rp) = (lattice.rank(), lattice_dag.rank());
    let meta = Meta {
        n: lattice.dim(),
        nprime: lattice_dag.dim(),
        r,
        rprime: rp,
        d: 0,
        s: 0,
        good: r == rp,
    };
    let mut variables: Vec<String> = Vec::with_capacity(r * rp + 1);
    for i in 1..=r {
        for j in 1..=rp {
            variables.push(format!("Z_{i}_{j}"));
        }
    }
    variables.push("zeta0".into());
    if !meta.good {
        return Ok(DiophantineSystem {
            meta,
            variables,
            polys: vec![TaggedPoly {
                tag: Tag::Const,
                poly: Poly::constant(1),
            }],
        });
    }
    let c = structure_constants(lattice)?;
    let cp = structure_constants(lattice_dag)?;
    let zeta0 = (r * rp) as u32;

    let mut polys = Vec::new();
    let z = PMat::variables(r, rp, 0);
    let det_eq = PMat::variables(1, 1, zeta0).mul(&z.det()).equations(&PMat::identity(1));
    push_all(&mut polys, Tag::E2, det_eq);
    for i in 0..r {
        for j in i + 1..r {
            for m in 0..rp {
                // Rational coefficients: collect with a common denominator.
                let mut terms: Vec<(Monomial, num_rational::BigRational)> = Vec::new();
                for a in 0..rp {
                    for b in 0..rp {
                        let coeff = cp.get(a, b, m);
                        if coeff.is_zero() {
                            continue;
                        }
                        let mono = Monomial::from_powers([((i * rp + a) as u32, 1), ((j * rp + b) as u32, 1)]);
                        terms.push((mono, coeff.clone()));
                    }
                }
                for k in 0..r {
                    let coeff = c.get(i, j, k);
                    if !coeff.is_zero() {
                        terms.push((Monomial::from_powers([((k * rp + m) as u32, 1)]), -coeff.clone()));
                    }
                }
                let lcm = terms.iter().fold(BigInt::one(), |l, (_, q)| l.lcm(q.denom()));
                let poly = Poly::from_terms(
                    terms
                        .into_iter()
                        .map(|(mono, q)| (mono, q.numer() * (&lcm / q.denom()))),
                );
                push_all(&mut polys, Tag::E3, vec![poly]);
            }
        }
    }
    Ok(DiophantineSystem { meta, variables, polys })
}

/// An assignment to every roster variable, over `Z` or modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(with = "crate::sysbuild::bigint_vec")]
    pub values: Vec<BigInt>,
    #[serde(with = "crate::sysbuild::bigint_opt")]
    pub modulus: Option<BigInt>,
}

impl Witness {
    pub fn exact(values: Vec<BigInt>) -> Self {
        Self { values, modulus: None }
    }

    /// Assignment by variable name; every roster variable must be present.
    pub fn from_named(system: &DiophantineSystem, named: &BTreeMap<String, BigInt>) -> Result<Self, SysError> {
        if let Some(unknown) = named.keys().find(|k| system.variable_index(k).is_none()) {
            return Err(SysError::UnknownVariable(unknown.clone()));
        }
        let values: Vec<BigInt> = system.variables.iter().filter_map(|v| named.get(v).cloned()).collect();
        if values.len() != system.variables.len() {
            return Err(SysError::IncompleteAssignment {
                expected: system.variables.len(),
                found: values.len(),
            });
        }
        Ok(Self::exact(values))
    }

    pub fn named(&self, system: &DiophantineSystem) -> BTreeMap<String, BigInt> {
        system.variables.iter().cloned().zip(self.values.iter().cloned()).collect()
    }
}

/// Largest residual per equation group: absolute values over `Z`, residues in
/// `[0, m)` modulo `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    #[serde(with = "crate::sysbuild::bigint_map")]
    pub max_residual: BTreeMap<Tag, BigInt>,
    pub all_zero: bool,
}

pub fn verify_witness(system: &DiophantineSystem, witness: &Witness) -> Result<ResidualReport, SysError> {
    if witness.values.len() != system.variables.len() {
        return Err(SysError::IncompleteAssignment {
            expected: system.variables.len(),
            found: witness.values.len(),
        });
    }
    let mut max_residual: BTreeMap<Tag, BigInt> = BTreeMap::new();
    for tp in &system.polys {
        let mut value = tp.poly.eval(&witness.values);
        value = match &witness.modulus {
            Some(m) => value.mod_floor(m),
            None => value.abs(),
        };
        let slot = max_residual.entry(tp.tag).or_default();
        if value > *slot {
            *slot = value;
        }
    }
    let all_zero = max_residual.values().all(Zero::is_zero);
    Ok(ResidualReport { max_residual, all_zero })
}

/// Data needed to propose exact witnesses by conjugation.
#[derive(Clone, Copy, Debug)]
pub struct WitnessHints<'a> {
    pub input: FullSystemInput<'a>,
    /// Generator matrices of `G`.
    pub g_gens: &'a [ExactMatrix],
    /// Evaluated lifts `h_1..h_d` in `G^dag`.
    pub lifts: &'a [ExactMatrix],
}

/// The witness induced by `H`, when `G^dag = H^{-1} G H` on generators up to
/// the lifts: `Xi(i) = H^{-1} g_i H h_i^{-1}`, `Z` from `H^{-1} e_i H`,
/// `lambda(i)` from `log Xi(i)`, `eta0 = 1/det H`, `zeta0 = 1/det Z`.
/// Returns `None` when any of these fails to be integral.
pub fn conjugation_witness(hints: &WitnessHints<'_>, h: &ExactMatrix) -> Option<Witness> {
    let input = &hints.input;
    let meta = meta_for(input);
    if !meta.good || h.rows() != meta.n || h.cols() != meta.nprime {
        return None;
    }
    let roster = Roster {
        n: meta.n,
        nprime: meta.nprime,
        r: meta.r,
        rprime: meta.rprime,
        d: meta.d,
    };
    let h_inv = h.inverse().ok()?;
    let det = h.det().ok()?;
    let eta0 = unit_inverse(&det)?;
    let mut values = vec![BigInt::zero(); roster.len()];
    let int = |x: &num_rational::BigRational| x.is_integer().then(|| x.to_integer());

    for i in 0..meta.n {
        for j in 0..meta.nprime {
            values[roster.h(i, j) as usize] = int(&h[(i, j)])?;
        }
    }
    let mut z = ExactMatrix::zeros(meta.r, meta.rprime);
    for (i, e) in input.lattice.basis().iter().enumerate() {
        let moved = h_inv.checked_mul(e).ok()?.checked_mul(h).ok()?;
        let coords = input.lattice_dag.coordinates(&moved)?;
        for (j, c) in coords.into_iter().enumerate() {
            z[(i, j)] = num_rational::BigRational::from_integer(c.clone());
            values[roster.z(i, j) as usize] = c;
        }
    }
    let zeta0 = unit_inverse(&z.det().ok()?)?;
    for k in 0..meta.d {
        let g = hints.g_gens.get(k)?;
        let lift_inv = hints.lifts.get(k)?.inverse().ok()?;
        let x = h_inv.checked_mul(g).ok()?.checked_mul(h).ok()?.checked_mul(&lift_inv).ok()?;
        if !x.is_integral() || !x.is_unipotent() {
            return None;
        }
        for i in 0..meta.nprime {
            for j in 0..meta.nprime {
                values[roster.xi(k, i, j) as usize] = int(&x[(i, j)])?;
            }
        }
        let coords = input.lattice_dag.coordinates(&unipotent_log(&x).ok()?)?;
        for (j, c) in coords.into_iter().enumerate() {
            values[roster.lam(k, j) as usize] = c;
        }
    }
    values[roster.eta0() as usize] = eta0;
    values[roster.zeta0() as usize] = zeta0;
    Some(Witness::exact(values))
}

fn unit_inverse(x: &num_rational::BigRational) -> Option<BigInt> {
    (x.is_integer() && x.to_integer().abs().is_one()).then(|| x.to_integer())
}

/// Candidate conjugators: the identity, signed permutation matrices, and for
/// `n <= 2` every matrix with entries in `{-1, 0, 1}`.
pub fn conjugator_candidates(n: usize) -> Vec<ExactMatrix> {
    let mut out = vec![ExactMatrix::identity(n)];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut perms = vec![perm.clone()];
    while next_permutation(&mut perm) {
        perms.push(perm.clone());
    }
    for p in &perms {
        for signs in 0..(1u32 << n) {
            let m = ExactMatrix::from_fn(n, n, |i, j| {
                if p[i] == j {
                    let s = if signs >> i & 1 == 1 { -1 } else { 1 };
                    num_rational::BigRational::from_integer(BigInt::from(s))
                } else {
                    num_rational::BigRational::zero()
                }
            });
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    if n <= 2 {
        let cells = n * n;
        for code in 0..3usize.pow(cells as u32) {
            let mut c = code;
            let m = ExactMatrix::from_fn(n, n, |_, _| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                num_rational::BigRational::from_integer(BigInt::from(v))
            });
            if !out.contains(&m) && m.det().is_ok_and(|d| !d.is_zero()) {
                out.push(m);
            }
        }
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// First conjugation witness that satisfies `system` exactly.
pub fn find_exact_witness(system: &DiophantineSystem, hints: &WitnessHints<'_>) -> Option<Witness> {
    if !system.meta.good {
        return None;
    }
    conjugator_candidates(system.meta.n)
        .iter()
        .filter_map(|h| conjugation_witness(hints, h))
        .find(|w| verify_witness(system, w).is_ok_and(|r| r.all_zero))
}

/// Witness of the bracket-transport system induced by conjugation:
/// `Z` from the coordinates of `H^{-1} e_i H` in `L'`, `zeta0 = 1/det Z`.
pub fn lie_conjugation_witness(lattice: &LieLattice, lattice_dag: &LieLattice, h: &ExactMatrix) -> Option<Witness> {
    if lattice.rank() != lattice_dag.rank() || h.rows() != lattice.dim() || h.cols() != lattice_dag.dim() {
        return None;
    }
    let r = lattice.rank();
    let h_inv = h.inverse().ok()?;
    let mut values = Vec::with_capacity(r * r + 1);
    let mut z = ExactMatrix::zeros(r, r);
    for (i, e) in lattice.basis().iter().enumerate() {
        let moved = h_inv.checked_mul(e).ok()?.checked_mul(h).ok()?;
        for (j, c) in lattice_dag.coordinates(&moved)?.into_iter().enumerate() {
            z[(i, j)] = num_rational::BigRational::from_integer(c.clone());
            values.push(c);
        }
    }
    values.push(unit_inverse(&z.det().ok()?)?);
    Some(Witness::exact(values))
}

/// First conjugation witness that satisfies the bracket-transport system.
pub fn find_lie_witness(system: &DiophantineSystem, lattice: &LieLattice, lattice_dag: &LieLattice) -> Option<Witness> {
    if !system.meta.good || lattice.dim() != lattice_dag.dim() {
        return None;
    }
    conjugator_candidates(lattice.dim())
        .iter()
        .filter_map(|h| lie_conjugation_witness(lattice, lattice_dag, h))
        .find(|w| verify_witness(system, w).is_ok_and(|r| r.all_zero))
}

pub(crate) mod bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub(crate) mod bigint_opt {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

pub(crate) mod bigint_map {
    use std::collections::BTreeMap;

    use num_bigint::BigInt;
    use serde::Serializer;

    use super::Tag;

    pub fn serialize<S: Serializer>(v: &BTreeMap<Tag, BigInt>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(v.iter().map(|(k, x)| (k.as_str(), x.to_string())))
    }
}
