//! Shared fixtures for the integration tests: the instance corpus and
//! isomorphism-preserving rewrites of instances.
#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use num_traits::{One, Zero};
use vpiso_core::decider::{IsoInstance, Side};
use vpiso_core::words::{Letter, Word};
use vpiso_core::{BigInt, BigRational, ExactMatrix};

pub fn instances_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

pub fn read_instance(name: &str) -> String {
    fs::read_to_string(instances_dir().join(name)).unwrap()
}

/// Every `*.vpiso` file in the corpus, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(instances_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "vpiso"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

pub fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn unit(n: usize, i: usize, j: usize) -> ExactMatrix {
    ExactMatrix::unit(n, i, j)
}

pub fn int_matrix(rows: &[&[i64]]) -> ExactMatrix {
    ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
}

/// Editable copy of one side of an instance.
#[derive(Clone, Debug)]
pub struct RawSide {
    pub names: Vec<String>,
    pub n: usize,
    pub gens: Vec<ExactMatrix>,
    pub relators: Vec<Word>,
    pub n_words: Vec<Word>,
}

impl From<&Side> for RawSide {
    fn from(s: &Side) -> Self {
        Self {
            names: s.gen_names.clone(),
            n: s.n,
            gens: s.gens.clone(),
            relators: s.relators.clone(),
            n_words: s.n_words.clone(),
        }
    }
}

fn relabel(w: &Word, new_index: &[usize]) -> Word {
    Word(w.letters().iter().map(|l| Letter::new(new_index[l.index - 1], l.inverse)).collect())
}

impl RawSide {
    /// Generator `i` becomes generator `perm[i]`.
    pub fn permute_generators(&self, perm: &[usize]) -> Self {
        let new_index: Vec<usize> = perm.iter().map(|&p| p + 1).collect();
        let mut names = vec![String::new(); self.names.len()];
        let mut gens = vec![ExactMatrix::identity(self.n); self.gens.len()];
        for (i, &p) in perm.iter().enumerate() {
            names[p] = self.names[i].clone();
            gens[p] = self.gens[i].clone();
        }
        Self {
            names,
            n: self.n,
            gens,
            relators: self.relators.iter().map(|w| relabel(w, &new_index)).collect(),
            n_words: self.n_words.iter().map(|w| relabel(w, &new_index)).collect(),
        }
    }

    pub fn invert_relators(&self) -> Self {
        Self {
            relators: self.relators.iter().map(Word::inverse).collect(),
            ..self.clone()
        }
    }

    /// Replaces each relator `r` by `g r g^-1` for generator `k` (1-based).
    pub fn conjugate_relators(&self, k: usize) -> Self {
        let g = Word::power(k, 1);
        Self {
            relators: self.relators.iter().map(|r| g.concat(r).concat(&g.inverse())).collect(),
            ..self.clone()
        }
    }

    pub fn rotate_relators(&self) -> Self {
        let mut relators = self.relators.clone();
        relators.rotate_left(1);
        Self { relators, ..self.clone() }
    }

    pub fn rotate_subgroup_words(&self) -> Self {
        let mut n_words = self.n_words.clone();
        n_words.rotate_left(1);
        Self { n_words, ..self.clone() }
    }

    /// Subgroup generators replaced by their inverses.
    pub fn invert_subgroup_words(&self) -> Self {
        Self {
            n_words: self.n_words.iter().map(Word::inverse).collect(),
            ..self.clone()
        }
    }

    /// Every generator matrix `g` replaced by `p^-1 g p`.
    pub fn conjugate_matrices(&self, p: &ExactMatrix) -> Self {
        let pinv = p.inverse().unwrap();
        Self {
            gens: self.gens.iter().map(|g| &(&pinv * g) * p).collect(),
            ..self.clone()
        }
    }
}

fn render_matrix(m: &ExactMatrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}

fn render_side(out: &mut String, label: &str, s: &RawSide) {
    out.push_str(&format!("[{label}]\nn = {}\n", s.n));
    for (name, g) in s.names.iter().zip(&s.gens) {
        out.push_str(&format!("gen {name} = {}\n", render_matrix(g)));
    }
    for r in &s.relators {
        out.push_str(&format!("rel = {r}\n"));
    }
    for w in &s.n_words {
        out.push_str(&format!("nword = {w}\n"));
    }
}

/// Instance text with the given sides; `[theta]` and `[lifts]` are dropped.
pub fn render(g: &RawSide, gdag: &RawSide, fitting: bool) -> String {
    let mut out = String::from("vpiso v1\n");
    render_side(&mut out, "G", g);
    render_side(&mut out, "Gdag", gdag);
    if fitting {
        out.push_str("[assume]\nprofinite_fitting = true\n");
    }
    out
}

/// Rewrites of `G` that give an isomorphic group with the same `N`,
/// labelled for failure messages. `p` is a fixed element of `GL_n(Z)`.
pub fn isomorphic_rewrites(inst: &IsoInstance) -> Vec<(String, String)> {
    let g = RawSide::from(&inst.g);
    let gdag = RawSide::from(&inst.gdag);
    let d = g.gens.len();
    let mut variants: Vec<(String, RawSide)> = Vec::new();
    let reversed: Vec<usize> = (0..d).rev().collect();
    variants.push(("reverse generators".into(), g.permute_generators(&reversed)));
    let cycle: Vec<usize> = (0..d).map(|i| (i + 1) % d).collect();
    variants.push(("cycle generators".into(), g.permute_generators(&cycle)));
    variants.push(("invert relators".into(), g.invert_relators()));
    for k in 1..=d {
        variants.push((format!("conjugate relators by g{k}"), g.conjugate_relators(k)));
    }
    variants.push(("rotate relators".into(), g.rotate_relators()));
    variants.push(("rotate subgroup words".into(), g.rotate_subgroup_words()));
    variants.push(("invert subgroup words".into(), g.invert_subgroup_words()));
    variants.push(("conjugate by GL_n(Z)".into(), g.conjugate_matrices(&shear(g.n))));
    variants
        .into_iter()
        .map(|(label, side)| (label, render(&side, &gdag, inst.profinite_fitting)))
        .collect()
}

/// A unimodular matrix that is neither triangular nor a permutation:
/// `I + E_{n1}` times the signed reversal.
pub fn shear(n: usize) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, n - 1 - i)] = if i % 2 == 0 { BigRational::one() } else { -BigRational::one() };
    }
    let mut e = ExactMatrix::identity(n);
    if n > 1 {
        e[(n - 1, 0)] = BigRational::one();
    }
    let p = &e * &m;
    assert!(!p.det().unwrap().is_zero());
    p
}
