//! Level-lifting depth-first search for solutions modulo `p^k`.
//!
//! Digits are assigned level by level (all variables at level 1, then all at
//! level 2, ...), so every solution modulo `p^{j+1}` extends one modulo
//! `p^j`. A polynomial is checked modulo `p^j` as soon as its last variable
//! in roster order receives its level-`j` digit.

use serde::Serialize;

use super::{is_prime, Budget, LocalError};
use crate::sysbuild::poly::ModPoly;
use crate::sysbuild::DiophantineSystem;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub prime: u64,
    pub level: u32,
    /// Residues in `[0, p^level)`, in search order.
    pub points: Vec<Vec<u128>>,
    /// The node budget was not exhausted: `points` is empty exactly when no
    /// solution exists, and complete unless `capped`.
    pub exhaustive: bool,
    /// The search stopped after `max_points` solutions.
    pub capped: bool,
    pub nodes: u64,
}

impl SolutionSet {
    pub fn modulus(&self) -> u128 {
        u128::from(self.prime).pow(self.level)
    }
}

/// Largest supported `p^k`, so that residue products fit in `u128`.
const MAX_MODULUS: u128 = 1 << 62;

struct Search<'a> {
    n: usize,
    p: u128,
    levels: u32,
    powers: Vec<u128>,
    buckets: Vec<Vec<usize>>,
    polys: &'a [ModPoly],
    x: Vec<u128>,
    nodes: u64,
    max_nodes: u64,
    max_points: usize,
    points: Vec<Vec<u128>>,
    out_of_nodes: bool,
}

impl Search<'_> {
    /// Returns `false` to stop the whole search.
    fn descend(&mut self, pos: usize) -> bool {
        if pos == self.n * self.levels as usize {
            self.points.push(self.x.clone());
            return self.points.len() < self.max_points;
        }
        let level = pos / self.n + 1;
        let var = pos % self.n;
        let place = self.powers[level - 1];
        let modulus = self.powers[level];
        for digit in 0..self.p {
            if self.nodes >= self.max_nodes {
                self.out_of_nodes = true;
                return false;
            }
            self.nodes += 1;
            self.x[var] += digit * place;
            let ok = self.buckets[var]
                .iter()
                .all(|&i| self.polys[i].eval(&self.x, modulus) == 0);
            let go_on = !ok || self.descend(pos + 1);
            self.x[var] -= digit * place;
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Solutions of `system` modulo `p^k`, found depth first with branch values
/// `0..p` in roster order.
pub fn solutions_mod(system: &DiophantineSystem, p: u64, k: u32, budget: &Budget) -> Result<SolutionSet, LocalError> {
    if !is_prime(p) {
        return Err(LocalError::NotPrime(p));
    }
    if k == 0 {
        return Err(LocalError::ZeroLevel);
    }
    let modulus = u128::from(p)
        .checked_pow(k)
        .filter(|&m| m <= MAX_MODULUS)
        .ok_or(LocalError::ModulusTooLarge { p, k })?;
    let n = system.variables.len();
    let polys: Vec<ModPoly> = system.polys.iter().map(|tp| ModPoly::new(&tp.poly, modulus)).collect();
    let mut buckets = vec![Vec::new(); n];
    let zero = vec![0u128; n];
    for (i, tp) in system.polys.iter().enumerate() {
        match tp.poly.max_variable() {
            Some(v) => buckets[v as usize].push(i),
            None => {
                if polys[i].eval(&zero, modulus) != 0 {
                    return Ok(SolutionSet {
                        prime: p,
                        level: k,
                        points: Vec::new(),
                        exhaustive: true,
                        capped: false,
                        nodes: 0,
                    });
                }
            }
        }
    }
    let powers: Vec<u128> = (0..=k).map(|j| u128::from(p).pow(j)).collect();
    let mut search = Search {
        n,
        p: u128::from(p),
        levels: k,
        powers,
        buckets,
        polys: &polys,
        x: zero,
        nodes: 0,
        max_nodes: budget.max_nodes,
        max_points: budget.max_points.max(1),
        points: Vec::new(),
        out_of_nodes: false,
    };
    if n == 0 {
        search.points.push(Vec::new());
    } else {
        search.descend(0);
    }
    let capped = !search.out_of_nodes && search.points.len() >= search.max_points;
    Ok(SolutionSet {
        prime: p,
        level: k,
        points: search.points,
        exhaustive: !search.out_of_nodes,
        capped,
        nodes: search.nodes,
    })
}
