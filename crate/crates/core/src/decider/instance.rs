//! The `vpiso v1` instance format and its validation.
//!
//! ```text
//! vpiso v1
//! [G]
//! n = 3
//! gen a = [[1,2,0],[0,1,0],[0,0,1]]
//! rel = -1 -3 1 3
//! nword = 1
//! [Gdag]
//! ...
//! [assume]
//! profinite_fitting = true
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::quotient::{abelianization_coords, AbelianQuotient};
use super::DecideError;
use crate::exactmat::{ExactMatrix, IntMatrix, MatrixError};
use crate::malcev::{MalcevError, TGroupRep};
use crate::words::{eval_word, Word};

/// One side of an instance: `G = <g_1..g_d | R>` with `N = <u_1(g)..u_s(g)>`.
#[derive(Clone, Debug)]
pub struct Side {
    pub label: &'static str,
    pub n: usize,
    pub gen_names: Vec<String>,
    pub gens: Vec<ExactMatrix>,
    pub relators: Vec<Word>,
    pub n_words: Vec<Word>,
    pub group: TGroupRep,
    /// `G/N`, from the relators together with the `N`-words.
    pub quotient: AbelianQuotient,
}

impl Side {
    pub fn d(&self) -> usize {
        self.gens.len()
    }

    /// `A(i) = u_i(g)`.
    pub fn subgroup_generators(&self) -> &[ExactMatrix] {
        self.group.generators()
    }
}

/// A declared quotient isomorphism. Row `k` of `free` is the image of the
/// `k`-th free basis element of `G/N` in the free coordinates of
/// `G^dag/N^dag`; row `k` of `torsion` likewise on torsion coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ThetaDecl {
    pub free: Option<Vec<Vec<i64>>>,
    pub torsion: Option<Vec<Vec<i64>>>,
    /// Section words in `G^dag` for quotient basis elements (1-based).
    pub sections: BTreeMap<usize, Word>,
}

#[derive(Clone, Debug)]
pub struct IsoInstance {
    pub g: Side,
    pub gdag: Side,
    pub theta: Option<ThetaDecl>,
    /// Declared lifts `h_1..h_d` as words in the generators of `G^dag`.
    pub lifts: Option<Vec<Word>>,
    /// Every isomorphism of completions maps the closure of `N` onto that
    /// of `N^dag`.
    pub profinite_fitting: bool,
}

impl IsoInstance {
    /// The fitting hypothesis is declared, or holds trivially because
    /// `G = N` on both sides.
    pub fn hypothesis_holds(&self) -> bool {
        self.profinite_fitting || (self.g.quotient.is_trivial() && self.gdag.quotient.is_trivial())
    }
}

#[derive(Default)]
struct RawSide {
    n: Option<usize>,
    gens: Vec<(String, ExactMatrix, usize)>,
    relators: Vec<(Word, usize)>,
    n_words: Vec<(Word, usize)>,
    seen: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    G,
    Gdag,
    Theta,
    Lifts,
    Assume,
}

fn syntax(line: usize, message: impl Into<String>) -> DecideError {
    DecideError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_rational(tok: &str) -> Option<BigRational> {
    let tok = tok.trim();
    match tok.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (BigInt::from_str(a.trim()).ok()?, BigInt::from_str(b.trim()).ok()?);
            (!num_traits::Zero::is_zero(&b)).then(|| BigRational::new(a, b))
        }
        None => BigInt::from_str(tok).ok().map(BigRational::from_integer),
    }
}

/// `[[a,b],[c,d]]` with entries `a` or `a/b`; `[]` is the empty matrix.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<BigRational>>, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "[]" {
        return Ok(Vec::new());
    }
    let inner = compact
        .strip_prefix("[[")
        .and_then(|s| s.strip_suffix("]]"))
        .ok_or_else(|| format!("expected a matrix [[...],...], found `{text}`"))?;
    let mut rows = Vec::new();
    for row in inner.split("],[") {
        let entries = row
            .split(',')
            .map(|t| parse_rational(t).ok_or_else(|| format!("bad matrix entry `{t}`")))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(entries);
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err("matrix rows have different lengths".into());
    }
    Ok(rows)
}

fn parse_int_matrix(text: &str) -> Result<Vec<Vec<i64>>, String> {
    parse_matrix(text)?
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|q| {
                    use num_traits::ToPrimitive;
                    if q.is_integer() {
                        q.to_integer().to_i64().ok_or_else(|| "matrix entry out of range".to_string())
                    } else {
                        Err(format!("matrix entry {q} is not an integer"))
                    }
                })
                .collect()
        })
        .collect()
}

fn parse_word(text: &str, line: usize) -> Result<Word, DecideError> {
    Word::from_str(text).map_err(|e| syntax(line, e.to_string()))
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<IsoInstance, DecideError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "vpiso v1")) => {}
        _ => return Err(syntax(1, "expected header `vpiso v1`")),
    }
    let mut section = Section::None;
    let mut g = RawSide::default();
    let mut gdag = RawSide::default();
    let mut theta: Option<ThetaDecl> = None;
    let mut lifts: BTreeMap<usize, Word> = BTreeMap::new();
    let mut fitting = false;
    for (line, content) in lines {
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if content.starts_with('[') && content.ends_with(']') && !content.contains('=') {
            section = match content {
                "[G]" => Section::G,
                "[Gdag]" => Section::Gdag,
                "[theta]" => Section::Theta,
                "[lifts]" => Section::Lifts,
                "[assume]" => Section::Assume,
                other => return Err(syntax(line, format!("unknown section {other}"))),
            };
            match section {
                Section::G => g.seen = true,
                Section::Gdag => gdag.seen = true,
                Section::Theta => {
                    theta.get_or_insert_with(ThetaDecl::default);
                }
                _ => {}
            }
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| syntax(line, "expected `key = value`"))?;
        match section {
            Section::None => return Err(syntax(line, "entry outside any section")),
            Section::G | Section::Gdag => {
                let side = if section == Section::G { &mut g } else { &mut gdag };
                parse_side_entry(side, key, value, line)?;
            }
            Section::Theta => {
                let decl = theta.as_mut().expect("theta section opened");
                if key == "free" {
                    decl.free = Some(parse_int_matrix(value).map_err(|m| syntax(line, m))?);
                } else if key == "torsion" {
                    decl.torsion = Some(parse_int_matrix(value).map_err(|m| syntax(line, m))?);
                } else if let Some(idx) = key.strip_prefix("section") {
                    let i: usize = idx
                        .trim()
                        .parse()
                        .ok()
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| syntax(line, format!("bad section index in `{key}`")))?;
                    decl.sections.insert(i, parse_word(value, line)?);
                } else {
                    return Err(syntax(line, format!("unknown theta key `{key}`")));
                }
            }
            Section::Lifts => {
                let i: usize = key
                    .strip_prefix('h')
                    .and_then(|s| s.parse().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| syntax(line, format!("expected h<i>, found `{key}`")))?;
                if lifts.insert(i, parse_word(value, line)?).is_some() {
                    return Err(syntax(line, format!("h{i} given twice")));
                }
            }
            Section::Assume => match (key, value) {
                ("profinite_fitting", "true") => fitting = true,
                ("profinite_fitting", "false") => fitting = false,
                _ => return Err(syntax(line, format!("unknown assumption `{key} = {value}`"))),
            },
        }
    }
    if !g.seen || !gdag.seen {
        return Err(syntax(0, "both [G] and [Gdag] sections are required"));
    }
    let g = build_side("G", g)?;
    let gdag = build_side("Gdag", gdag)?;
    let lifts = if lifts.is_empty() {
        None
    } else {
        let d = g.d();
        if lifts.len() != d || lifts.keys().copied().ne(1..=d) {
            return Err(DecideError::Invalid {
                side: "lifts",
                message: format!("expected h1..h{d}"),
            });
        }
        let words: Vec<Word> = lifts.into_values().collect();
        for w in &words {
            if w.max_index() > gdag.d() {
                return Err(DecideError::Invalid {
                    side: "lifts",
                    message: format!("word `{w}` uses a generator outside Gdag"),
                });
            }
        }
        Some(words)
    };
    Ok(IsoInstance {
        g,
        gdag,
        theta,
        lifts,
        profinite_fitting: fitting,
    })
}

fn parse_side_entry(side: &mut RawSide, key: &str, value: &str, line: usize) -> Result<(), DecideError> {
    if key == "n" {
        let n: usize = value.parse().map_err(|_| syntax(line, format!("bad dimension `{value}`")))?;
        if n == 0 {
            return Err(syntax(line, "dimension must be positive"));
        }
        side.n = Some(n);
    } else if let Some(name) = key.strip_prefix("gen ") {
        let rows = parse_matrix(value).map_err(|m| syntax(line, m))?;
        let m = ExactMatrix::from_rows(rows).map_err(|e| syntax(line, e.to_string()))?;
        side.gens.push((name.trim().to_string(), m, line));
    } else if key == "rel" {
        side.relators.push((parse_word(value, line)?, line));
    } else if key == "nword" {
        side.n_words.push((parse_word(value, line)?, line));
    } else {
        return Err(syntax(line, format!("unknown key `{key}`")));
    }
    Ok(())
}

fn build_side(label: &'static str, raw: RawSide) -> Result<Side, DecideError> {
    let invalid = |message: String| DecideError::Invalid { side: label, message };
    let n = raw.n.ok_or_else(|| invalid("missing `n = ...`".into()))?;
    let d = raw.gens.len();
    if d == 0 {
        return Err(invalid("no generators".into()));
    }
    for (name, m, line) in &raw.gens {
        if m.rows() != n || m.cols() != n {
            return Err(invalid(format!("generator {name} (line {line}) is not {n}x{n}")));
        }
        if !m.is_integral() {
            return Err(invalid(format!("generator {name} (line {line}) is not integral")));
        }
        let det = m.det().map_err(|e| invalid(e.to_string()))?;
        if !det.is_integer() || !det.to_integer().abs().is_one() {
            return Err(invalid(format!("generator {name} (line {line}) has determinant {det}, not +-1")));
        }
    }
    let gens: Vec<ExactMatrix> = raw.gens.iter().map(|(_, m, _)| m.clone()).collect();
    for (w, line) in raw.relators.iter().chain(&raw.n_words) {
        if w.max_index() > d {
            return Err(invalid(format!("word `{w}` (line {line}) uses generator {} of {d}", w.max_index())));
        }
    }
    for (w, line) in &raw.relators {
        let value = eval_word(w, &gens).map_err(|e| invalid(e.to_string()))?;
        if !value.is_identity() {
            return Err(invalid(format!("relator `{w}` (line {line}) evaluates to {value}, not the identity")));
        }
    }
    if raw.n_words.is_empty() {
        return Err(invalid("no nword lines".into()));
    }
    let mut a = Vec::with_capacity(raw.n_words.len());
    for (w, line) in &raw.n_words {
        let value = eval_word(w, &gens).map_err(|e| invalid(e.to_string()))?;
        if !value.is_unipotent() {
            return Err(invalid(format!("nword `{w}` (line {line}) is not unipotent")));
        }
        a.push(value);
    }
    let group = TGroupRep::new(n, a, false).map_err(|e| match e {
        MalcevError::Saturated => invalid("N is not a lattice group: the BCH hull of its logs is saturating".into()),
        MalcevError::Matrix(MatrixError::NotUnipotent) => invalid("an nword is not unipotent".into()),
        e => invalid(e.to_string()),
    })?;
    for (name, m, _) in &raw.gens {
        if !group.lattice().normalized_by(m) {
            return Err(invalid(format!("generator {name} does not normalize N")));
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            let c = Word::from_signed(&[i as i64 + 1, j as i64 + 1, -(i as i64 + 1), -(j as i64 + 1)]);
            let value = eval_word(&c, &gens).map_err(|e| invalid(e.to_string()))?;
            if group.lattice().membership(&value).is_none() {
                return Err(invalid(format!(
                    "G/N is not abelian: the commutator of {} and {} is outside N",
                    raw.gens[i].0, raw.gens[j].0
                )));
            }
        }
    }
    let relators: Vec<Word> = raw.relators.into_iter().map(|(w, _)| w).collect();
    let n_words: Vec<Word> = raw.n_words.into_iter().map(|(w, _)| w).collect();
    let rows: Vec<&Word> = relators.iter().chain(&n_words).collect();
    let quotient = abelianization_coords(d, &rows);
    Ok(Side {
        label,
        n,
        gen_names: raw.gens.into_iter().map(|(name, _, _)| name).collect(),
        gens,
        relators,
        n_words,
        group,
        quotient,
    })
}

/// Relation matrix with one row of exponent sums per word.
pub fn relation_matrix(d: usize, words: &[&Word]) -> IntMatrix {
    let mut m = IntMatrix::zeros(words.len(), d);
    for (r, w) in words.iter().enumerate() {
        for (c, x) in w.exponent_sums(d).into_iter().enumerate() {
            m[(r, c)] = BigInt::from(x);
        }
    }
    m
}
