use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::MalcevError;
use crate::exactmat::{
    hermite_form, hermite_solve, nilpotent_exp, unipotent_log, ExactMatrix,
};
use crate::scalar::denominator_lcm;

/// Order in which matrix entries are flattened into lattice coordinates:
/// superdiagonals first (offset 1, 2, ...), then the diagonal, then the
/// subdiagonals. For unitriangular data this makes Hermite bases follow the
/// lower central series, e.g. `E12, E23, E13` in dimension 3.
pub(crate) fn coordinate_order(n: usize) -> Vec<(usize, usize)> {
    let mut offsets: Vec<isize> = (1..n as isize).collect();
    offsets.push(0);
    offsets.extend((1..n as isize).map(|k| -k));
    let mut order = Vec::with_capacity(n * n);
    for off in offsets {
        for i in 0..n {
            let j = i as isize + off;
            if (0..n as isize).contains(&j) {
                order.push((i, j as usize));
            }
        }
    }
    order
}

fn flatten(m: &ExactMatrix, order: &[(usize, usize)]) -> Vec<BigRational> {
    order.iter().map(|&(i, j)| m[(i, j)].clone()).collect()
}

fn unflatten(n: usize, v: &[BigRational], order: &[(usize, usize)]) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(n, n);
    for (x, &(i, j)) in v.iter().zip(order) {
        m[(i, j)] = x.clone();
    }
    m
}

/// Campbell-Hausdorff product `log(exp x * exp y)` of nilpotent matrices.
pub fn bch(x: &ExactMatrix, y: &ExactMatrix) -> Result<ExactMatrix, MalcevError> {
    let prod = nilpotent_exp(x)?.checked_mul(&nilpotent_exp(y)?)?;
    Ok(unipotent_log(&prod)?)
}

/// A full additive lattice of nilpotent `n x n` matrices, stored as a
/// Hermite basis of integer coordinate vectors over a common denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LieLattice {
    n: usize,
    denominator: BigInt,
    /// Hermite rows of `denominator * e_i` in [`coordinate_order`].
    rows: Vec<Vec<BigInt>>,
}

impl LieLattice {
    /// The Z-span of `elements`, in canonical form.
    pub fn span(n: usize, elements: &[ExactMatrix]) -> Result<Self, MalcevError> {
        let order = coordinate_order(n);
        let mut flat = Vec::with_capacity(elements.len());
        for e in elements {
            if e.rows() != n || e.cols() != n {
                return Err(MalcevError::Dimension {
                    expected: n,
                    found: e.rows(),
                });
            }
            flat.push(flatten(e, &order));
        }
        let denom = denominator_lcm(flat.iter().flatten());
        let scaled: Vec<Vec<BigInt>> = flat
            .iter()
            .map(|v| v.iter().map(|q| (q * &denom).to_integer()).collect())
            .collect();
        let rows = if scaled.is_empty() {
            Vec::new()
        } else {
            hermite_form(&scaled)
        };
        Ok(Self::normalized(n, denom, rows))
    }

    /// Rescales to the smallest common denominator so equal lattices compare
    /// equal.
    fn normalized(n: usize, denom: BigInt, rows: Vec<Vec<BigInt>>) -> Self {
        let g = rows
            .iter()
            .flatten()
            .fold(denom.clone(), |acc, x| acc.gcd(x));
        let (denom, rows) = if g.is_one() || g.is_zero() {
            (denom, rows)
        } else {
            (
                &denom / &g,
                rows.into_iter()
                    .map(|r| r.into_iter().map(|x| x / &g).collect())
                    .collect(),
            )
        };
        Self {
            n,
            denominator: denom,
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn basis(&self) -> Vec<ExactMatrix> {
        (0..self.rank()).map(|i| self.basis_element(i)).collect()
    }

    pub fn basis_element(&self, i: usize) -> ExactMatrix {
        let order = coordinate_order(self.n);
        let v: Vec<BigRational> = self.rows[i]
            .iter()
            .map(|x| BigRational::new(x.clone(), self.denominator.clone()))
            .collect();
        unflatten(self.n, &v, &order)
    }

    /// `sum_i z_i e_i`.
    pub fn element<T: Clone + Into<BigRational>>(&self, coords: &[T]) -> ExactMatrix {
        assert_eq!(coords.len(), self.rank(), "coordinate vector length");
        let order = coordinate_order(self.n);
        let mut acc = vec![BigInt::zero(); order.len()];
        let mut scale = BigInt::one();
        let coords: Vec<BigRational> = coords.iter().cloned().map(Into::into).collect();
        let denom = denominator_lcm(&coords);
        for (c, row) in coords.iter().zip(&self.rows) {
            let c = (c * &denom).to_integer();
            for (a, x) in acc.iter_mut().zip(row) {
                *a += &c * x;
            }
        }
        scale *= &denom * &self.denominator;
        let v: Vec<BigRational> = acc
            .into_iter()
            .map(|x| BigRational::new(x, scale.clone()))
            .collect();
        unflatten(self.n, &v, &order)
    }

    /// Integer coordinates of a nilpotent matrix in this basis, if it lies in
    /// the lattice.
    pub fn coordinates(&self, x: &ExactMatrix) -> Option<Vec<BigInt>> {
        let scaled = self.scaled_vector(x)?;
        if self.rows.is_empty() {
            return scaled.iter().all(Zero::is_zero).then(Vec::new);
        }
        hermite_solve(&self.rows, &scaled)
    }

    /// Rational coordinates of `x` in the Q-span of the basis.
    pub fn rational_coordinates(&self, x: &ExactMatrix) -> Option<Vec<BigRational>> {
        if x.rows() != self.n || x.cols() != self.n {
            return None;
        }
        let order = coordinate_order(self.n);
        let target: Vec<BigRational> = flatten(x, &order)
            .into_iter()
            .map(|q| q * BigRational::from_integer(self.denominator.clone()))
            .collect();
        if self.rows.is_empty() {
            return target.iter().all(Zero::is_zero).then(Vec::new);
        }
        let basis = ExactMatrix::from_rows(
            self.rows
                .iter()
                .map(|r| r.iter().cloned().map(BigRational::from_integer).collect())
                .collect(),
        )
        .expect("rectangular basis");
        basis.solve_row_combination(&target)
    }

    /// `denominator * x` as an integer vector, or `None` if that is not
    /// integral (then `x` cannot lie in the lattice).
    fn scaled_vector(&self, x: &ExactMatrix) -> Option<Vec<BigInt>> {
        if x.rows() != self.n || x.cols() != self.n {
            return None;
        }
        coordinate_order(self.n)
            .into_iter()
            .map(|(i, j)| {
                let q = &x[(i, j)] * BigRational::from_integer(self.denominator.clone());
                q.is_integer().then(|| q.to_integer())
            })
            .collect()
    }

    pub fn contains(&self, x: &ExactMatrix) -> bool {
        self.coordinates(x).is_some()
    }

    /// Coordinates of `log g` when `g` is unipotent and `log g` lies in the
    /// lattice, i.e. when `g` lies in `exp(L)`.
    pub fn membership(&self, g: &ExactMatrix) -> Option<Vec<BigInt>> {
        if g.rows() != self.n || !g.is_unipotent() {
            return None;
        }
        self.coordinates(&unipotent_log(g).ok()?)
    }

    /// `true` when conjugation by `g` maps the lattice onto itself.
    pub fn normalized_by(&self, g: &ExactMatrix) -> bool {
        let Ok(ginv) = g.inverse() else {
            return false;
        };
        self.basis().iter().all(|e| {
            let fwd = &(&ginv * e) * g;
            let back = &(g * e) * &ginv;
            self.contains(&fwd) && self.contains(&back)
        })
    }

    /// `true` if `other` is contained in `self`.
    pub fn contains_lattice(&self, other: &LieLattice) -> bool {
        other.basis().iter().all(|e| self.contains(e))
    }
}

impl fmt::Debug for LieLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis: Vec<String> = self.basis().iter().map(ToString::to_string).collect();
        write!(f, "LieLattice(n={}, <{}>)", self.n, basis.join(", "))
    }
}

/// Output of [`lattice_closure`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub lattice: LieLattice,
    /// The hull is strictly larger than the Z-span of the generator logs.
    pub saturated: bool,
}

/// Exponent points `(x, y)` in `N^r x N^r` with `|x| + |y| <= degree`.
///
/// A polynomial map of total degree `<= degree` on `Z^{2r}` takes values whose
/// Z-span equals the span of its values on these points (expand in the
/// binomial basis), so closure under BCH can be tested on this finite set.
pub(crate) fn binomial_points(vars: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(vars: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == vars {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k as u32);
            rec(vars, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, degree, &mut Vec::with_capacity(vars), &mut out);
    out
}

/// Smallest additive lattice containing `log g` for every generator and
/// closed under the BCH product.
pub fn lattice_closure(n: usize, gens: &[ExactMatrix]) -> Result<Closure, MalcevError> {
    let mut logs = Vec::with_capacity(gens.len());
    for g in gens {
        if g.rows() != n || g.cols() != n {
            return Err(MalcevError::Dimension {
                expected: n,
                found: g.rows(),
            });
        }
        logs.push(unipotent_log(g)?);
    }
    let initial = LieLattice::span(n, &logs)?;
    let degree = n.saturating_sub(1).max(1);
    let mut current = initial.clone();
    loop {
        let basis = current.basis();
        let r = basis.len();
        let mut spanning = basis.clone();
        for point in binomial_points(2 * r, degree) {
            let (xs, ys) = point.split_at(r);
            if xs.iter().all(|&a| a == 0) || ys.iter().all(|&a| a == 0) {
                continue;
            }
            let x = current.element(&xs.iter().map(|&a| BigInt::from(a)).collect::<Vec<_>>());
            let y = current.element(&ys.iter().map(|&a| BigInt::from(a)).collect::<Vec<_>>());
            let z = bch(&x, &y)?;
            if !current.contains(&z) {
                spanning.push(z);
            }
        }
        if spanning.len() == r {
            break;
        }
        current = LieLattice::span(n, &spanning)?;
    }
    let saturated = current != initial;
    Ok(Closure {
        lattice: current,
        saturated,
    })
}

/// Structure constants `[e_i, e_j] = sum_k c_ijk e_k` of a lattice basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    rank: usize,
    c: Vec<BigRational>,
}

impl StructureConstants {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `c_ijk`, 0-based.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.c[(i * self.rank + j) * self.rank + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    /// Jacobi identity, checked exactly on basis triples.
    pub fn satisfies_jacobi(&self) -> bool {
        let r = self.rank;
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for m in 0..r {
                        // [[a,b],c] + [[b,c],a] + [[c,a],b], coefficient of e_m
                        let mut total = BigRational::zero();
                        for k in 0..r {
                            total += self.get(a, b, k) * self.get(k, c, m);
                            total += self.get(b, c, k) * self.get(k, a, m);
                            total += self.get(c, a, k) * self.get(k, b, m);
                        }
                        if !total.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn is_antisymmetric(&self) -> bool {
        let r = self.rank;
        (0..r).all(|i| {
            (0..r).all(|j| (0..r).all(|k| *self.get(i, j, k) == -self.get(j, i, k).clone()))
        })
    }
}

pub fn structure_constants(lattice: &LieLattice) -> Result<StructureConstants, MalcevError> {
    let basis = lattice.basis();
    let r = basis.len();
    let mut c = vec![BigRational::zero(); r * r * r];
    for i in 0..r {
        for j in i + 1..r {
            let br = basis[i].bracket(&basis[j])?;
            let coords = lattice
                .rational_coordinates(&br)
                .ok_or(MalcevError::BracketOutsideSpan { i: i + 1, j: j + 1 })?;
            for (k, q) in coords.into_iter().enumerate() {
                c[(j * r + i) * r + k] = -q.clone();
                c[(i * r + j) * r + k] = q;
            }
        }
    }
    Ok(StructureConstants { rank: r, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn e(i: usize, j: usize) -> ExactMatrix {
        ExactMatrix::unit(3, i, j)
    }

    fn q(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    fn exp(a: &ExactMatrix) -> ExactMatrix {
        nilpotent_exp(a).unwrap()
    }

    fn two_heisenberg() -> LieLattice {
        LieLattice::span(3, &[e(1, 2).scale(&q(2, 1)), e(2, 3).scale(&q(2, 1)), e(1, 3).scale(&q(2, 1))]).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn coordinate_order_puts_superdiagonal_first() {
        assert_eq!(coordinate_order(3)[..3], [(0, 1), (1, 2), (0, 2)]);
        assert_eq!(coordinate_order(3).len(), 9);
    }

    #[test]
    fn bch_examples() {
        let x = &e(1, 2).scale(&q(3, 1)) + &e(1, 3);
        assert_eq!(bch(&x, &ExactMatrix::zeros(3, 3)).unwrap(), x);
        assert!(bch(&x, &-&x).unwrap().is_zero());
        let expected = &(&e(1, 2) + &e(2, 3)) + &e(1, 3).scale(&q(1, 2));
        assert_eq!(bch(&e(1, 2), &e(2, 3)).unwrap(), expected);
        assert!(matches!(bch(&e(1, 2), &ExactMatrix::zeros(2, 2)), Err(MalcevError::Matrix(_))));
    }

    #[test]
    fn closure_without_saturation() {
        let two = q(2, 1);
        let id = ExactMatrix::identity(3);
        let gens = [&id + &e(1, 2).scale(&two), &id + &e(2, 3).scale(&two), &id + &e(1, 3).scale(&two)];
        let c = lattice_closure(3, &gens).unwrap();
        assert!(!c.saturated);
        assert_eq!(c.lattice.basis(), vec![e(1, 2).scale(&two), e(2, 3).scale(&two), e(1, 3).scale(&two)]);
    }

    #[test]
    fn closure_of_full_unitriangular_group_saturates() {
        let id = ExactMatrix::identity(3);
        let c = lattice_closure(3, &[&id + &e(1, 2), &id + &e(2, 3)]).unwrap();
        assert!(c.saturated);
        assert_eq!(c.lattice.basis(), vec![e(1, 2), e(2, 3), e(1, 3).scale(&q(1, 2))]);
    }

    #[test]
    fn closure_of_trivial_group_is_empty() {
        let c = lattice_closure(3, &[ExactMatrix::identity(3)]).unwrap();
        assert_eq!(c.lattice.rank(), 0);
        assert!(!c.saturated);
        assert_eq!(c.lattice.membership(&ExactMatrix::identity(3)), Some(vec![]));
    }

    #[test]
    fn membership_examples() {
        let l = two_heisenberg();
        assert_eq!(l.membership(&ExactMatrix::identity(3)), Some(ints(&[0, 0, 0])));
        let g = ExactMatrix::from_rows(vec![
            vec![q(1, 1), q(2, 1), q(4, 1)],
            vec![q(0, 1), q(1, 1), q(2, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        assert_eq!(l.membership(&g), Some(ints(&[1, 1, 1])));
        let mut h = g.clone();
        h[(0, 2)] = q(3, 1);
        assert_eq!(l.membership(&h), None);
    }

    #[test]
    fn structure_constant_examples() {
        let sc = structure_constants(&two_heisenberg()).unwrap();
        assert_eq!(*sc.get(0, 1, 2), q(2, 1));
        assert_eq!(*sc.get(1, 0, 2), q(-2, 1));
        let nonzero = (0..27).filter(|&t| !sc.c[t].is_zero()).count();
        assert_eq!(nonzero, 2);
        assert!(sc.is_antisymmetric() && sc.satisfies_jacobi());

        let l4 = LieLattice::span(3, &[e(1, 2), e(2, 3).scale(&q(4, 1)), e(1, 3)]).unwrap();
        assert_eq!(*structure_constants(&l4).unwrap().get(0, 1, 2), q(4, 1));

        let abelian = LieLattice::span(3, &[e(1, 3), e(1, 2)]).unwrap();
        assert!(structure_constants(&abelian).unwrap().is_abelian());
    }

    #[test]
    fn bracket_outside_span_is_reported() {
        let l = LieLattice::span(3, &[e(1, 2), e(2, 3)]).unwrap();
        assert_eq!(structure_constants(&l), Err(MalcevError::BracketOutsideSpan { i: 1, j: 2 }));
    }

    #[test]
    fn products_stay_in_closed_lattice() {
        let l = two_heisenberg();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                let x = l.element(&ints(&[a, b, 1]));
                let y = l.element(&ints(&[b, -a, a * b]));
                assert!(l.membership(&(&exp(&x) * &exp(&y))).is_some());
            }
        }
    }

    #[test]
    fn span_is_canonical() {
        let a = LieLattice::span(3, &[e(1, 2), e(1, 3)]).unwrap();
        let b = LieLattice::span(3, &[&e(1, 2) + &e(1, 3), e(1, 3).scale(&q(-1, 1))]).unwrap();
        assert_eq!(a, b);
        let half = LieLattice::span(3, &[e(1, 2).scale(&q(1, 2)), e(1, 2)]).unwrap();
        assert_eq!(half.denominator(), &BigInt::from(2));
        assert_eq!(half.rank(), 1);
    }
}
