//! Integer normal forms: row-style Hermite form for lattice bases and Smith
//! form for abelian invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::IntMatrix;

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Zero rows are dropped, pivots are positive and every entry above a pivot
/// lies in `[0, pivot)`. The result is a canonical basis of the row lattice.
pub fn hermite_form(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    assert!(
        rows.iter().all(|r| r.len() == width),
        "hermite_form: vectors of unequal length"
    );
    let mut work: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    for col in 0..width {
        // Euclid on column `col` over the remaining rows.
        loop {
            let nonzero: Vec<usize> = (0..work.len()).filter(|&i| !work[i][col].is_zero()).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let &small = nonzero
                .iter()
                .min_by(|&&a, &&b| work[a][col].abs().cmp(&work[b][col].abs()))
                .expect("nonempty");
            let pivot_row = work[small].clone();
            for &i in &nonzero {
                if i != small {
                    let q = work[i][col].div_floor(&pivot_row[col]);
                    sub_multiple(&mut work[i], &pivot_row, &q);
                }
            }
        }
        let Some(idx) = (0..work.len()).find(|&i| !work[i][col].is_zero()) else {
            continue;
        };
        let mut row = work.swap_remove(idx);
        if row[col].is_negative() {
            row.iter_mut().for_each(|x| *x = -x.clone());
        }
        for b in basis.iter_mut() {
            let q = b[col].div_floor(&row[col]);
            if !q.is_zero() {
                sub_multiple(b, &row, &q);
            }
        }
        basis.push(row);
        work.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    basis
}

/// `row -= q * other`
fn sub_multiple(row: &mut [BigInt], other: &[BigInt], q: &BigInt) {
    for (x, y) in row.iter_mut().zip(other) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// Column index of the first nonzero entry of each Hermite row.
pub fn pivot_columns(basis: &[Vec<BigInt>]) -> Vec<usize> {
    basis
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).expect("Hermite rows are nonzero"))
        .collect()
}

/// Integer coordinates of `v` in a Hermite basis, or `None` when `v` is not
/// in the lattice.
pub fn hermite_solve(basis: &[Vec<BigInt>], v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = v.to_vec();
    let mut coords = Vec::with_capacity(basis.len());
    for (row, col) in basis.iter().zip(pivot_columns(basis)) {
        if rest[..col].iter().any(|x| !x.is_zero()) {
            return None;
        }
        let (q, r) = rest[col].div_rem(&row[col]);
        if !r.is_zero() {
            return None;
        }
        sub_multiple(&mut rest, row, &q);
        coords.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coords)
}

/// Abelian invariants of `Z^cols / rowspace(M)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmithInvariants {
    /// Invariant factors `d_1 | d_2 | ...`, each at least 2.
    pub factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl std::fmt::Display for SmithInvariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 {
                "Z".to_string()
            } else {
                format!("Z^{}", self.free_rank)
            });
        }
        parts.extend(self.factors.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// Smith decomposition `U * M * V = D` with `U`, `V` unimodular and `D`
/// diagonal with `d_1 | d_2 | ...`, all diagonal entries nonnegative.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn invariants(&self) -> SmithInvariants {
        SmithInvariants {
            factors: self.diagonal().into_iter().filter(|d| !d.is_one()).collect(),
            free_rank: self.d.cols() - self.rank,
        }
    }
}

pub fn smith_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[(i, j)].is_zero()
                    && best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        let mut dirty = false;
        for i in t + 1..rows {
            if !d[(i, t)].is_zero() {
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                d.add_row_multiple(i, t, &-q.clone());
                u.add_row_multiple(i, t, &-q);
                dirty |= !d[(i, t)].is_zero();
            }
        }
        for j in t + 1..cols {
            if !d[(t, j)].is_zero() {
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                add_col_multiple(&mut d, j, t, &-q.clone());
                add_col_multiple(&mut v, j, t, &-q);
                dirty |= !d[(t, j)].is_zero();
            }
        }
        if dirty {
            continue;
        }
        // Enforce divisibility of the rest of the block by the pivot.
        let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !d[(i, j)].is_multiple_of(&d[(t, t)])));
        if let Some(i) = bad {
            d.add_row_multiple(t, i, &BigInt::one());
            u.add_row_multiple(t, i, &BigInt::one());
            continue;
        }
        if d[(t, t)].is_negative() {
            d.scale_row(t, &-BigInt::one());
            u.scale_row(t, &-BigInt::one());
        }
        t += 1;
    }
    SmithForm { u, d, v, rank: t }
}

/// Invariant factors (units discarded) and free rank of the abelian group
/// presented by `m`: rows are relators, columns are generators.
pub fn smith_invariants(m: &IntMatrix) -> SmithInvariants {
    smith_form(m).invariants()
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let tmp = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = tmp;
    }
}

/// `col[dst] += c * col[src]`
fn add_col_multiple(m: &mut IntMatrix, dst: usize, src: usize, c: &BigInt) {
    for i in 0..m.rows() {
        let v = &m[(i, src)] * c;
        m[(i, dst)] += v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(ints(rows)).unwrap()
    }

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hermite_examples() {
        let h = hermite_form(&ints(&[&[2, 0, 0], &[0, 2, 0], &[2, 2, 2]]));
        assert_eq!(h, ints(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]));
        assert_eq!(hermite_form(&ints(&[&[1, 0], &[0, 1]])), ints(&[&[1, 0], &[0, 1]]));
        assert!(hermite_form(&ints(&[&[0, 0]])).is_empty());
        assert!(hermite_form(&[]).is_empty());
    }

    #[test]
    fn hermite_reduces_above_pivots() {
        let h = hermite_form(&ints(&[&[1, 5, 7], &[0, 3, -4], &[0, 0, 5]]));
        assert_eq!(h, ints(&[&[1, 2, 1], &[0, 3, 1], &[0, 0, 5]]));
        assert_eq!(hermite_solve(&h, &big(&[1, 5, 7])), Some(big(&[1, 1, 1])));
        assert_eq!(hermite_solve(&h, &big(&[0, 0, 1])), None);
    }

    #[test]
    fn smith_examples() {
        let id = smith_invariants(&IntMatrix::identity(3));
        assert_eq!(id, SmithInvariants { factors: vec![], free_rank: 0 });
        let one = smith_invariants(&mat(&[&[0, 0, 4]]));
        assert_eq!(one, SmithInvariants { factors: big(&[4]), free_rank: 2 });
        let six = smith_invariants(&mat(&[&[2, 0], &[0, 3]]));
        assert_eq!(six, SmithInvariants { factors: big(&[6]), free_rank: 0 });
        let empty = smith_invariants(&IntMatrix::zeros(0, 2));
        assert_eq!(empty.free_rank, 2);
    }

    #[test]
    fn smith_transforms_are_consistent() {
        let m = mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = smith_form(&m);
        assert_eq!(&(&s.u * &m) * &s.v, s.d);
        assert_eq!(s.u.det_int().unwrap().abs(), BigInt::one());
        assert_eq!(s.v.det_int().unwrap().abs(), BigInt::one());
        assert_eq!(s.diagonal(), big(&[2, 6, 12]));
    }
}
