//! Finitely generated abelian quotients `G/N`, their coordinates, and the
//! enumeration of quotient isomorphisms with lifts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::instance::{relation_matrix, Side, ThetaDecl};
use super::DecideError;
use crate::exactmat::{smith_form, IntMatrix, SmithInvariants};
use crate::words::Word;

/// Largest torsion subgroup whose automorphisms are enumerated.
pub const MAX_TORSION_ORDER: u64 = 1 << 16;

/// `Z^d / rowspace(M)` with the Smith change of basis `x -> x V`.
///
/// Coordinates list the torsion components first (reduced into
/// `[0, t_k)`), then the free components.
#[derive(Clone, Debug)]
pub struct AbelianQuotient {
    pub invariants: SmithInvariants,
    d: usize,
    v: IntMatrix,
    v_inv: IntMatrix,
    /// Columns of `x V` carrying torsion and free components.
    torsion_cols: Vec<usize>,
    free_cols: Vec<usize>,
}

/// Abelian invariants and coordinate map of the group generated by `d`
/// letters subject to `words`.
pub fn abelianization_coords(d: usize, words: &[&Word]) -> AbelianQuotient {
    let m = relation_matrix(d, words);
    let smith = smith_form(&m);
    let diag = smith.diagonal();
    let torsion_cols: Vec<usize> = (0..smith.rank).filter(|&j| !diag[j].is_one()).collect();
    let free_cols: Vec<usize> = (smith.rank..d).collect();
    let v_inv = smith
        .v
        .to_rational()
        .inverse()
        .and_then(|m| m.to_integer())
        .expect("Smith transforms are unimodular");
    AbelianQuotient {
        invariants: smith.invariants(),
        d,
        v: smith.v,
        v_inv,
        torsion_cols,
        free_cols,
    }
}

impl AbelianQuotient {
    pub fn torsion(&self) -> &[BigInt] {
        &self.invariants.factors
    }

    pub fn free_rank(&self) -> usize {
        self.invariants.free_rank
    }

    /// Number of coordinates (torsion then free).
    pub fn dim(&self) -> usize {
        self.torsion_cols.len() + self.free_cols.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    /// Quotient coordinates of the image of a word.
    pub fn coords(&self, w: &Word) -> Vec<BigInt> {
        let x: Vec<BigInt> = w.exponent_sums(self.d).into_iter().map(BigInt::from).collect();
        let y: Vec<BigInt> = (0..self.d)
            .map(|j| (0..self.d).map(|i| &x[i] * &self.v[(i, j)]).sum())
            .collect();
        let mut out: Vec<BigInt> = self
            .torsion_cols
            .iter()
            .zip(self.torsion())
            .map(|(&j, t)| y[j].mod_floor(t))
            .collect();
        out.extend(self.free_cols.iter().map(|&j| y[j].clone()));
        out
    }

    /// A word mapping to the `k`-th quotient basis element (0-based).
    pub fn section(&self, k: usize) -> Word {
        let col = if k < self.torsion_cols.len() {
            self.torsion_cols[k]
        } else {
            self.free_cols[k - self.torsion_cols.len()]
        };
        let mut letters = Vec::new();
        for i in 0..self.d {
            let e = self.v_inv[(col, i)].to_i64().expect("small section exponent");
            letters.extend(Word::power(i + 1, e).0);
        }
        Word(letters)
    }
}

/// A quotient isomorphism `theta: G/N -> G^dag/N^dag` with lifts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaSpec {
    /// Position in the enumeration (0 for a declared theta).
    pub index: usize,
    /// Row `k`: image of the `k`-th basis element of `G/N` in the
    /// coordinates of `G^dag/N^dag` (torsion first, then free).
    pub images: Vec<Vec<i64>>,
    /// `h_i` as words in the generators of `G^dag`, with `N g_i theta = N^dag h_i`.
    #[serde(serialize_with = "words_as_strings")]
    pub lifts: Vec<Word>,
}

fn words_as_strings<S: serde::Serializer>(words: &[Word], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(words.iter().map(|w| w.to_string()))
}

/// Lazily enumerated quotient isomorphisms in a fixed order, the identity
/// (when it makes sense) first.
pub struct ThetaStream {
    torsion: Vec<i64>,
    free: usize,
    /// Allowed values per digit, in enumeration order.
    digits: Vec<Vec<i64>>,
    state: Vec<usize>,
    done: bool,
    produced: usize,
    source: Vec<Vec<BigInt>>,
    sections: Vec<Word>,
    /// Every isomorphism is in the stream (finite quotients only).
    pub complete: bool,
    declared: Option<ThetaSpec>,
}

fn small(x: &BigInt) -> Result<i64, DecideError> {
    x.to_i64().filter(|&v| v as u64 <= MAX_TORSION_ORDER).ok_or(DecideError::TorsionTooLarge)
}

/// `v0, v0+1, v0-1, v0+2, ...` restricted to `[-b, b]`.
fn around(v0: i64, b: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for k in 0..=(2 * b + 2) {
        for v in [v0 + k, v0 - k] {
            if v.abs() <= b && !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

fn cyclic_from(start: i64, t: i64) -> Vec<i64> {
    (0..t).map(|k| (start + k).rem_euclid(t)).collect()
}

fn section_words(target: &Side, decl: Option<&ThetaDecl>) -> Vec<Word> {
    (0..target.quotient.dim())
        .map(|k| {
            decl.and_then(|t| t.sections.get(&(k + 1)).cloned())
                .unwrap_or_else(|| target.quotient.section(k))
        })
        .collect()
}

/// Enumeration of `theta` between the quotients of `a` and `b`: free parts
/// by unimodular matrices with entries in `[-height, height]`, torsion parts
/// by all automorphisms, plus every homomorphism from the free part to the
/// torsion part. Empty when the invariants differ.
pub fn enumerate_theta(a: &Side, b: &Side, height: u32, decl: Option<&ThetaDecl>) -> Result<ThetaStream, DecideError> {
    let qa = &a.quotient;
    let source: Vec<Vec<BigInt>> = (0..a.d())
        .map(|i| qa.coords(&Word::from_signed(&[i as i64 + 1])))
        .collect();
    let torsion: Vec<i64> = b.quotient.torsion().iter().map(small).collect::<Result<_, _>>()?;
    let order: u64 = torsion.iter().try_fold(1u64, |acc, &t| acc.checked_mul(t as u64)).unwrap_or(u64::MAX);
    if order > MAX_TORSION_ORDER {
        return Err(DecideError::TorsionTooLarge);
    }
    let f = b.quotient.free_rank();
    let m = torsion.len();
    let sections = section_words(b, decl);
    let mut stream = ThetaStream {
        torsion: torsion.clone(),
        free: f,
        digits: Vec::new(),
        state: Vec::new(),
        done: qa.invariants != b.quotient.invariants,
        produced: 0,
        source,
        sections,
        complete: f == 0,
        declared: None,
    };
    if let Some(decl) = decl.filter(|t| t.free.is_some() || t.torsion.is_some()) {
        let free = decl.free.clone().unwrap_or_else(|| identity_rows(f));
        let tors = decl.torsion.clone().unwrap_or_else(|| identity_rows(m));
        let shape_ok = free.len() == f && free.iter().all(|r| r.len() == f) && tors.len() == m && tors.iter().all(|r| r.len() == m);
        if !shape_ok || stream.done {
            return Err(DecideError::Invalid {
                side: "theta",
                message: "declared theta does not match the quotient invariants".into(),
            });
        }
        let mut images: Vec<Vec<i64>> = tors.iter().map(|r| pad(r, f)).collect();
        images.extend(free.iter().map(|r| std::iter::repeat_n(0, m).chain(r.iter().copied()).collect()));
        if !stream.is_isomorphism(&images) {
            return Err(DecideError::Invalid {
                side: "theta",
                message: "declared theta is not an isomorphism of quotients".into(),
            });
        }
        let spec = stream.spec(0, images);
        stream.declared = Some(spec);
        stream.complete = false;
        return Ok(stream);
    }
    let b = i64::from(height);
    // Torsion block: images of torsion generators; then free rows: torsion
    // components followed by free components.
    for k in 0..m {
        for (l, &t) in torsion.iter().enumerate() {
            stream.digits.push(cyclic_from(i64::from(k == l), t));
        }
    }
    for k in 0..f {
        for &t in &torsion {
            stream.digits.push(cyclic_from(0, t));
        }
        for l in 0..f {
            stream.digits.push(around(i64::from(k == l), b));
        }
    }
    if stream.digits.iter().any(Vec::is_empty) {
        stream.done = true;
    }
    stream.state = vec![0; stream.digits.len()];
    Ok(stream)
}

/// The single `theta` induced by declared lifts `h_i`, checked to be a
/// well-defined isomorphism of quotients.
pub fn theta_from_lifts(a: &Side, b: &Side, lifts: &[Word]) -> Result<ThetaStream, DecideError> {
    let invalid = |message: &str| DecideError::Invalid {
        side: "lifts",
        message: message.into(),
    };
    let mut stream = enumerate_theta(a, b, 0, None)?;
    if a.quotient.invariants != b.quotient.invariants {
        return Err(invalid("the quotients G/N and Gdag/N^dag are not isomorphic"));
    }
    let m = stream.torsion.len();
    let substitute = |w: &Word| -> Word {
        let mut letters = Vec::new();
        for l in w.letters() {
            let h = &lifts[l.index - 1];
            let h = if l.inverse { h.inverse() } else { h.clone() };
            letters.extend(h.0);
        }
        Word(letters)
    };
    let reduce = |y: Vec<BigInt>| -> Result<Vec<i64>, DecideError> {
        y.into_iter()
            .enumerate()
            .map(|(l, v)| {
                let v = if l < m { v.mod_floor(&BigInt::from(stream.torsion[l])) } else { v };
                v.to_i64().ok_or_else(|| invalid("lift coordinates out of range"))
            })
            .collect()
    };
    let images: Vec<Vec<i64>> = (0..a.quotient.dim())
        .map(|k| reduce(b.quotient.coords(&substitute(&a.quotient.section(k)))))
        .collect::<Result<_, _>>()?;
    for (i, h) in lifts.iter().enumerate() {
        let c = &stream.source[i];
        let predicted: Vec<BigInt> = (0..images.first().map_or(0, Vec::len))
            .map(|l| c.iter().enumerate().map(|(k, ck)| ck * BigInt::from(images[k][l])).sum())
            .collect();
        if reduce(predicted)? != reduce(b.quotient.coords(h))? {
            return Err(invalid("the lifts do not define a homomorphism G/N -> Gdag/N^dag"));
        }
    }
    if !stream.is_isomorphism(&images) {
        return Err(invalid("the lifts do not induce an isomorphism of quotients"));
    }
    stream.declared = Some(ThetaSpec {
        index: 0,
        images,
        lifts: lifts.to_vec(),
    });
    stream.done = false;
    stream.complete = false;
    Ok(stream)
}

fn identity_rows(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

fn pad(row: &[i64], extra: usize) -> Vec<i64> {
    row.iter().copied().chain(std::iter::repeat_n(0, extra)).collect()
}

impl ThetaStream {
    fn current(&self) -> Vec<Vec<i64>> {
        let width = self.torsion.len() + self.free;
        let m = self.torsion.len();
        let values: Vec<i64> = self.state.iter().zip(&self.digits).map(|(&s, d)| d[s]).collect();
        let mut rows = Vec::with_capacity(width);
        let mut it = values.into_iter();
        for _ in 0..m {
            let mut row: Vec<i64> = it.by_ref().take(m).collect();
            row.extend(std::iter::repeat_n(0, self.free));
            rows.push(row);
        }
        for _ in 0..self.free {
            rows.push(it.by_ref().take(width).collect());
        }
        rows
    }

    fn advance(&mut self) {
        for pos in (0..self.state.len()).rev() {
            self.state[pos] += 1;
            if self.state[pos] < self.digits[pos].len() {
                return;
            }
            self.state[pos] = 0;
        }
        self.done = true;
    }

    /// Well defined on torsion, bijective on torsion, unimodular on the
    /// free part (the matrix is block triangular).
    fn is_isomorphism(&self, rows: &[Vec<i64>]) -> bool {
        let m = self.torsion.len();
        let t = &self.torsion;
        for k in 0..m {
            for l in 0..m {
                if (t[k] * rows[k][l]).rem_euclid(t[l]) != 0 {
                    return false;
                }
            }
        }
        if m > 0 {
            let order: i64 = t.iter().product();
            let mut seen = vec![false; order as usize];
            let mut x = vec![0i64; m];
            for _ in 0..order {
                let mut idx = 0i64;
                for l in 0..m {
                    let y = (0..m).map(|k| x[k] * rows[k][l]).sum::<i64>().rem_euclid(t[l]);
                    idx = idx * t[l] + y;
                }
                if std::mem::replace(&mut seen[idx as usize], true) {
                    return false;
                }
                for l in (0..m).rev() {
                    x[l] += 1;
                    if x[l] < t[l] {
                        break;
                    }
                    x[l] = 0;
                }
            }
        }
        let f = self.free;
        let gamma = IntMatrix::from_fn(f, f, |i, j| BigInt::from(rows[m + i][m + j]));
        f == 0 || gamma.det_int().is_ok_and(|d| d.abs().is_one())
    }

    fn spec(&self, index: usize, images: Vec<Vec<i64>>) -> ThetaSpec {
        let m = self.torsion.len();
        let width = m + self.free;
        let lifts = self
            .source
            .iter()
            .map(|c| {
                let mut y = vec![BigInt::zero(); width];
                for (k, ck) in c.iter().enumerate() {
                    for (l, yl) in y.iter_mut().enumerate() {
                        *yl += ck * BigInt::from(images[k][l]);
                    }
                }
                let mut letters = Vec::new();
                for (l, yl) in y.iter().enumerate() {
                    let e = if l < m { yl.mod_floor(&BigInt::from(self.torsion[l])) } else { yl.clone() };
                    let e = e.to_i64().expect("small lift exponent");
                    let w = if e < 0 { self.sections[l].inverse() } else { self.sections[l].clone() };
                    for _ in 0..e.unsigned_abs() {
                        letters.extend(w.0.iter().copied());
                    }
                }
                Word(letters).reduced()
            })
            .collect();
        ThetaSpec { index, images, lifts }
    }
}

impl Iterator for ThetaStream {
    type Item = ThetaSpec;

    fn next(&mut self) -> Option<ThetaSpec> {
        if let Some(spec) = self.declared.take() {
            self.done = true;
            return Some(spec);
        }
        while !self.done {
            let rows = self.current();
            self.advance();
            if self.is_isomorphism(&rows) {
                let spec = self.spec(self.produced, rows);
                self.produced += 1;
                return Some(spec);
            }
        }
        None
    }
}
