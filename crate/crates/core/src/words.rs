//! Words in a free group, their evaluation on matrices, and the derived
//! (twisted) word of a substitution `g_i -> v_i h_i`.
//!
//! For any word `w`,
//!
//! ```text
//! w(v_1 h_1, ..., v_d h_d) = w'_h(v_1, ..., v_d) * w(h_1, ..., h_d)
//! ```
//!
//! where `w'_h` is a product of conjugates `(v_l^{+-1})^x = x^{-1} v_l^{+-1} x`
//! with each `x` a product of `h_j^{+-1}`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exactmat::{ExactMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("generator index {index} out of range 1..={available}")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("invalid letter `{0}`: expected a nonzero signed integer")]
    BadLetter(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A generator `g_index` (1-based) raised to `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        assert!(index >= 1, "generator indices are 1-based");
        Self { index, inverse }
    }

    pub fn inv(self) -> Self {
        Self {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// From signed 1-based indices, e.g. `[1, -2]` is `g1 g2^-1`.
    pub fn from_signed(letters: &[i64]) -> Self {
        Self(
            letters
                .iter()
                .map(|&x| {
                    assert!(x != 0, "letter 0 is not a generator");
                    Letter::new(x.unsigned_abs() as usize, x < 0)
                })
                .collect(),
        )
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.0.iter().map(|l| l.index).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    /// `g_index^power`.
    pub fn power(index: usize, power: i64) -> Self {
        let letter = Letter::new(index, power < 0);
        Self(vec![letter; power.unsigned_abs() as usize])
    }

    /// Freely reduced form.
    pub fn reduced(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    /// Exponent sum of each of the first `d` generators.
    pub fn exponent_sums(&self, d: usize) -> Vec<i64> {
        let mut sums = vec![0; d];
        for l in &self.0 {
            if l.index <= d {
                sums[l.index - 1] += l.sign();
            }
        }
        sums
    }

    /// Signed integer form, e.g. `1 -2 1`.
    pub fn to_signed(&self) -> Vec<i64> {
        self.0.iter().map(|l| l.sign() * l.index as i64).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_signed().iter().map(i64::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = WordError;

    /// Whitespace-separated nonzero signed integers; the empty string is the
    /// empty word.
    fn from_str(s: &str) -> Result<Self, WordError> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| WordError::BadLetter(tok.to_string()))?;
            if x == 0 {
                return Err(WordError::BadLetter(tok.to_string()));
            }
            letters.push(Letter::new(x.unsigned_abs() as usize, x < 0));
        }
        Ok(Self(letters))
    }
}

/// Evaluates `w` on `assignment[i-1]` for generator `g_i`, left to right.
/// `inverses`, when given, supplies precomputed inverses.
pub fn eval_word(w: &Word, assignment: &[ExactMatrix]) -> Result<ExactMatrix, WordError> {
    let inverses = inverses_needed(w, assignment)?;
    eval_with_inverses(w, assignment, &inverses)
}

fn inverses_needed(w: &Word, assignment: &[ExactMatrix]) -> Result<Vec<Option<ExactMatrix>>, WordError> {
    let mut inverses = vec![None; assignment.len()];
    for l in w.letters() {
        if l.index == 0 || l.index > assignment.len() {
            return Err(WordError::IndexOutOfRange {
                index: l.index,
                available: assignment.len(),
            });
        }
        if l.inverse && inverses[l.index - 1].is_none() {
            inverses[l.index - 1] = Some(assignment[l.index - 1].inverse()?);
        }
    }
    Ok(inverses)
}

fn eval_with_inverses(
    w: &Word,
    assignment: &[ExactMatrix],
    inverses: &[Option<ExactMatrix>],
) -> Result<ExactMatrix, WordError> {
    let n = assignment.first().map_or(0, ExactMatrix::rows);
    let mut acc = ExactMatrix::identity(n);
    for l in w.letters() {
        let m = if l.inverse {
            inverses[l.index - 1].as_ref().expect("inverse precomputed")
        } else {
            &assignment[l.index - 1]
        };
        acc = acc.checked_mul(m)?;
    }
    Ok(acc)
}

/// One factor `(v_target^{+-1})^conjugator` of a derived word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedFactor {
    /// Index `l(m)` of the substituted generator (1-based).
    pub target: usize,
    pub inverse: bool,
    /// Word in the `h`-alphabet.
    pub conjugator: Word,
}

/// The derived word `w'_h` of a source word `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedWord {
    pub factors: Vec<TwistedFactor>,
    /// The source word; evaluated on `h` it gives the trailing `w(h)`.
    pub remainder: Word,
}

/// Left-to-right construction: with prefix `c_0 = 1`,
/// a letter `g_i` contributes `v_i^{c_{j-1}^{-1}}` and sets `c_j = c_{j-1} h_i`;
/// a letter `g_i^{-1}` sets `c_j = c_{j-1} h_i^{-1}` and contributes
/// `(v_i^{-1})^{c_j^{-1}}`.
pub fn derived_word(w: &Word) -> TwistedWord {
    let mut prefix = Word::empty();
    let mut factors = Vec::with_capacity(w.len());
    for &l in w.letters() {
        if l.inverse {
            prefix.0.push(l);
            factors.push(TwistedFactor {
                target: l.index,
                inverse: true,
                conjugator: prefix.inverse(),
            });
        } else {
            factors.push(TwistedFactor {
                target: l.index,
                inverse: false,
                conjugator: prefix.inverse(),
            });
            prefix.0.push(l);
        }
    }
    TwistedWord {
        factors,
        remainder: w.clone(),
    }
}

impl TwistedWord {
    /// `prod_m Y_m^{-1} v_{l(m)}^{eps_m} Y_m` with `Y_m` the conjugator
    /// evaluated at `h`.
    pub fn eval_factors(&self, v: &[ExactMatrix], h: &[ExactMatrix]) -> Result<ExactMatrix, WordError> {
        let n = v.first().or(h.first()).map_or(0, ExactMatrix::rows);
        let mut acc = ExactMatrix::identity(n);
        for f in &self.factors {
            if f.target == 0 || f.target > v.len() {
                return Err(WordError::IndexOutOfRange {
                    index: f.target,
                    available: v.len(),
                });
            }
            let y = eval_word(&f.conjugator, h)?;
            let core = if f.inverse {
                v[f.target - 1].inverse()?
            } else {
                v[f.target - 1].clone()
            };
            acc = acc.checked_mul(&y.inverse()?)?.checked_mul(&core)?.checked_mul(&y)?;
        }
        Ok(acc)
    }
}

/// A twisted factor with its conjugator evaluated: contributes
/// `Y^{-1} v_target^{+-1} Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecializedFactor {
    pub target: usize,
    pub inverse: bool,
    pub conjugator: ExactMatrix,
}

/// Constant matrices of one word `w`: its twisted factors and `w(h)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecializedWord {
    pub factors: Vec<SpecializedFactor>,
    /// `w(h_1, ..., h_d)`: `B(w)` for relators, `C(i)` for subgroup words.
    pub tail: ExactMatrix,
}

impl SpecializedWord {
    /// `prod_m Y_m^{-1} v^{eps_m} Y_m`, i.e. `w'_h(v)` as a matrix.
    pub fn eval_factors(&self, v: &[ExactMatrix]) -> Result<ExactMatrix, WordError> {
        let n = self.tail.rows();
        let mut acc = ExactMatrix::identity(n);
        for f in &self.factors {
            let core = if f.inverse {
                v[f.target - 1].inverse()?
            } else {
                v[f.target - 1].clone()
            };
            acc = acc
                .checked_mul(&f.conjugator.inverse()?)?
                .checked_mul(&core)?
                .checked_mul(&f.conjugator)?;
        }
        Ok(acc)
    }
}

/// Everything the Diophantine system needs from the words: `Y_m(w)`, `B(w)`
/// per relator, the analogous data and `C(i)` per subgroup word, and
/// `A(i) = u_i(g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecializedConstants {
    pub relators: Vec<SpecializedWord>,
    pub subgroup: Vec<SpecializedWord>,
    pub a: Vec<ExactMatrix>,
}

/// Data needed to specialize words of `G` at lifts `h_i` in `G^dag`.
#[derive(Clone, Copy, Debug)]
pub struct SpecializationInput<'a> {
    pub g_gens: &'a [ExactMatrix],
    pub relators: &'a [Word],
    pub n_words: &'a [Word],
    /// Lifts `h_1..h_d` as words in the generators of `G^dag`.
    pub lifts: &'a [Word],
    pub gdag_gens: &'a [ExactMatrix],
    pub lattice: &'a crate::malcev::LieLattice,
    pub lattice_dag: &'a crate::malcev::LieLattice,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecializeError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("expected {expected} lifts, got {found}")]
    LiftCount { expected: usize, found: usize },
    #[error("{0} does not lie in N-dagger")]
    NotInNdag(String),
    #[error("conjugator of {0} does not normalize the lattice of N-dagger")]
    NotNormalizing(String),
    #[error("A({0}) is not in exp(L)")]
    NotInN(usize),
}

/// Evaluates all constant matrices and checks that the lifts are consistent:
/// every `Y_m` normalizes `L'`, every `B(w)` and `C(i)` lies in `exp(L')`,
/// and every `A(i)` lies in `exp(L)`.
pub fn specialize_constants(input: SpecializationInput<'_>) -> Result<SpecializedConstants, SpecializeError> {
    let d = input.g_gens.len();
    if input.lifts.len() != d {
        return Err(SpecializeError::LiftCount {
            expected: d,
            found: input.lifts.len(),
        });
    }
    let h: Vec<ExactMatrix> = input
        .lifts
        .iter()
        .map(|w| eval_word(w, input.gdag_gens))
        .collect::<Result<_, _>>()?;
    let mut normalizer_cache: std::collections::HashMap<Word, ExactMatrix> = Default::default();

    let mut specialize = |w: &Word, label: String| -> Result<SpecializedWord, SpecializeError> {
        let twisted = derived_word(w);
        let mut factors = Vec::with_capacity(twisted.factors.len());
        for (m, f) in twisted.factors.iter().enumerate() {
            let y = match normalizer_cache.get(&f.conjugator) {
                Some(y) => y.clone(),
                None => {
                    let y = eval_word(&f.conjugator, &h)?;
                    if !input.lattice_dag.normalized_by(&y) {
                        return Err(SpecializeError::NotNormalizing(format!("factor {} of {label}", m + 1)));
                    }
                    normalizer_cache.insert(f.conjugator.clone(), y.clone());
                    y
                }
            };
            factors.push(SpecializedFactor {
                target: f.target,
                inverse: f.inverse,
                conjugator: y,
            });
        }
        let tail = eval_word(w, &h)?;
        if input.lattice_dag.membership(&tail).is_none() {
            return Err(SpecializeError::NotInNdag(label));
        }
        Ok(SpecializedWord { factors, tail })
    };

    let relators = input
        .relators
        .iter()
        .enumerate()
        .map(|(i, w)| specialize(w, format!("B(relator {})", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let subgroup = input
        .n_words
        .iter()
        .enumerate()
        .map(|(i, w)| specialize(w, format!("C({})", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let a = input
        .n_words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let m = eval_word(w, input.g_gens)?;
            if input.lattice.membership(&m).is_none() {
                return Err(SpecializeError::NotInN(i + 1));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpecializedConstants { relators, subgroup, a })
}
