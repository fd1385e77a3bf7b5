//! Finite quotients `exp(L) / exp(mL)` in lattice coordinates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::lattice::{bch, binomial_points, LieLattice};
use super::MalcevError;

/// `n choose k` for small arguments.
fn binom_u128(n: u64, k: u32) -> u128 {
    if u64::from(k) > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..u64::from(k) {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

fn binom_big(n: &BigInt, k: u32) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * (n - BigInt::from(i)) / BigInt::from(i + 1);
    }
    acc
}

/// The group law of `exp(L)` in basis coordinates,
/// `z = bch(sum x_i e_i, sum y_j e_j)`, expanded in the binomial basis
/// `z = sum_a c_a prod_t binom(w_t, a_t)` over `w = (x, y)`.
///
/// Coordinates of a BCH-closed lattice are integer-valued, so the `c_a` are
/// integer vectors.
#[derive(Clone, Debug)]
pub struct BchLaw {
    rank: usize,
    degree: usize,
    /// `(a, c_a)` with `c_a != 0`.
    terms: Vec<(Vec<u32>, Vec<BigInt>)>,
}

/// Forward difference coefficients of `values` (indexed like `points`).
fn binomial_coefficients(
    points: &[Vec<u32>],
    values: &[Vec<BigRational>],
) -> Vec<(Vec<u32>, Vec<BigRational>)> {
    let index: std::collections::HashMap<&[u32], usize> =
        points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let width = values.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for alpha in points {
        let mut coeff = vec![BigRational::zero(); width];
        for beta in sub_points(alpha) {
            let mut weight = BigInt::from(1);
            let mut parity = 0u32;
            for (&a, &b) in alpha.iter().zip(&beta) {
                weight *= binom_big(&BigInt::from(a), b);
                parity += a - b;
            }
            if parity % 2 == 1 {
                weight = -weight;
            }
            let w = BigRational::from_integer(weight);
            for (c, v) in coeff.iter_mut().zip(&values[index[beta.as_slice()]]) {
                *c += &w * v;
            }
        }
        if coeff.iter().any(|c| !c.is_zero()) {
            out.push((alpha.clone(), coeff));
        }
    }
    out
}

/// All `beta <= alpha` componentwise.
fn sub_points(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=a).map(move |b| {
                    let mut p = prefix.clone();
                    p.push(b);
                    p
                })
            })
            .collect();
    }
    out
}

impl BchLaw {
    pub fn new(lattice: &LieLattice) -> Result<Self, MalcevError> {
        let r = lattice.rank();
        let degree = lattice.dim().saturating_sub(1).max(1);
        let points = binomial_points(2 * r, degree);
        let mut values = Vec::with_capacity(points.len());
        for p in &points {
            let (xs, ys) = p.split_at(r);
            let x = lattice.element(&xs.iter().map(|&a| BigInt::from(a)).collect::<Vec<_>>());
            let y = lattice.element(&ys.iter().map(|&a| BigInt::from(a)).collect::<Vec<_>>());
            let z = bch(&x, &y)?;
            let coords = lattice.coordinates(&z).ok_or(MalcevError::NotClosed)?;
            values.push(coords.into_iter().map(BigRational::from_integer).collect());
        }
        let terms = binomial_coefficients(&points, &values)
            .into_iter()
            .map(|(a, c)| (a, c.into_iter().map(|q| q.to_integer()).collect()))
            .collect();
        Ok(Self {
            rank: r,
            degree,
            terms,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Exact product in coordinates.
    pub fn multiply(&self, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let w: Vec<&BigInt> = x.iter().chain(y).collect();
        let mut z = vec![BigInt::zero(); self.rank];
        for (alpha, c) in &self.terms {
            let mut m = BigInt::from(1);
            for (wt, &a) in w.iter().zip(alpha) {
                if a > 0 {
                    m *= binom_big(wt, a);
                }
            }
            if !m.is_zero() {
                for (zk, ck) in z.iter_mut().zip(c) {
                    *zk += &m * ck;
                }
            }
        }
        z
    }

    /// `true` when the product is well defined on coordinates modulo `m`,
    /// i.e. `(Q(w + m*u) - Q(w)) / m` is integer-valued for the law `Q`.
    /// Then `exp(mL)` is a normal subgroup and the quotient has order `m^r`.
    pub fn is_admissible(&self, m: u64) -> bool {
        if m < 2 {
            return false;
        }
        let r2 = 2 * self.rank;
        let mb = BigInt::from(m);
        let points = binomial_points(2 * r2, self.degree);
        let values: Vec<Vec<BigRational>> = points
            .iter()
            .map(|p| {
                let (w, u) = p.split_at(r2);
                let shifted: Vec<BigInt> = w
                    .iter()
                    .zip(u)
                    .map(|(&a, &b)| BigInt::from(a) + &mb * BigInt::from(b))
                    .collect();
                let base: Vec<BigInt> = w.iter().map(|&a| BigInt::from(a)).collect();
                let hi = self.multiply(&shifted[..self.rank], &shifted[self.rank..]);
                let lo = self.multiply(&base[..self.rank], &base[self.rank..]);
                hi.iter()
                    .zip(&lo)
                    .map(|(a, b)| BigRational::new(a - b, mb.clone()))
                    .collect()
            })
            .collect();
        binomial_coefficients(&points, &values)
            .iter()
            .all(|(_, c)| c.iter().all(BigRational::is_integer))
    }
}

/// `exp(L) / exp(mL)`: coordinate vectors modulo `m` with the BCH product.
#[derive(Clone, Debug)]
pub struct LatticeQuotient {
    rank: usize,
    modulus: u64,
    order: usize,
    terms: Vec<(Vec<u32>, Vec<u64>)>,
    /// `binom[z][k] mod m` for `z < m`, `k <= degree`.
    binom: Vec<Vec<u64>>,
}

/// Largest quotient handled by the finite-group routines.
pub const MAX_QUOTIENT_ORDER: u64 = 1 << 20;

impl LatticeQuotient {
    pub fn new(law: &BchLaw, modulus: u64) -> Result<Self, MalcevError> {
        if !law.is_admissible(modulus) {
            return Err(MalcevError::InadmissibleModulus(modulus));
        }
        let order = (modulus as u128)
            .checked_pow(law.rank as u32)
            .filter(|&o| o <= u128::from(MAX_QUOTIENT_ORDER))
            .ok_or(MalcevError::QuotientTooLarge {
                modulus,
                rank: law.rank,
            })? as usize;
        let mb = BigInt::from(modulus);
        let terms = law
            .terms
            .iter()
            .map(|(a, c)| {
                let c = c
                    .iter()
                    .map(|x| x.mod_floor(&mb).to_u64().expect("reduced"))
                    .collect();
                (a.clone(), c)
            })
            .collect();
        let binom = (0..modulus)
            .map(|z| {
                (0..=law.degree as u32)
                    .map(|k| (binom_u128(z, k) % u128::from(modulus)) as u64)
                    .collect()
            })
            .collect();
        Ok(Self {
            rank: law.rank,
            modulus,
            order,
            terms,
            binom,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn encode(&self, coords: &[u64]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.modulus as usize + c as usize)
    }

    pub fn decode(&self, mut index: usize) -> Vec<u64> {
        let m = self.modulus as usize;
        (0..self.rank)
            .map(|_| {
                let c = (index % m) as u64;
                index /= m;
                c
            })
            .collect()
    }

    fn product_coords(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let m = u128::from(self.modulus);
        let mut z = vec![0u128; self.rank];
        for (alpha, c) in &self.terms {
            let mut mono: u128 = 1;
            for (w, &a) in x.iter().chain(y).zip(alpha) {
                if a > 0 {
                    mono = mono * u128::from(self.binom[*w as usize][a as usize]) % m;
                    if mono == 0 {
                        break;
                    }
                }
            }
            if mono != 0 {
                for (zk, &ck) in z.iter_mut().zip(c) {
                    *zk = (*zk + mono * u128::from(ck)) % m;
                }
            }
        }
        z.into_iter().map(|v| v as u64).collect()
    }
}

impl super::group::FiniteGroup for LatticeQuotient {
    fn order(&self) -> usize {
        self.order
    }

    fn identity(&self) -> usize {
        0
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let z = self.product_coords(&self.decode(a), &self.decode(b));
        self.encode(&z)
    }

    fn inv(&self, a: usize) -> usize {
        // exp(x)^{-1} = exp(-x)
        let m = self.modulus;
        let neg: Vec<u64> = self.decode(a).into_iter().map(|c| (m - c) % m).collect();
        self.encode(&neg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::ExactMatrix;
    use crate::malcev::group::FiniteGroup;
    use crate::scalar::rat;

    fn e(i: usize, j: usize) -> ExactMatrix {
        ExactMatrix::unit(3, i, j)
    }

    fn lattice(scales: [i64; 3]) -> LieLattice {
        LieLattice::span(
            3,
            &[e(1, 2).scale(&rat(scales[0], 1)), e(2, 3).scale(&rat(scales[1], 1)), e(1, 3).scale(&rat(scales[2], 1))],
        )
        .unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn law_matches_matrix_bch() {
        let l = lattice([2, 2, 2]);
        let law = BchLaw::new(&l).unwrap();
        for x in [[1, 0, 0], [2, -1, 3], [-3, 5, 0]] {
            for y in [[0, 1, 0], [4, 4, -1], [-1, -2, 7]] {
                let z = law.multiply(&ints(&x), &ints(&y));
                let direct = bch(&l.element(&ints(&x)), &l.element(&ints(&y))).unwrap();
                assert_eq!(l.coordinates(&direct).unwrap(), z);
            }
        }
    }

    #[test]
    fn admissibility_follows_denominators() {
        let half = LieLattice::span(3, &[e(1, 2), e(2, 3), e(1, 3).scale(&rat(1, 2))]).unwrap();
        let law = BchLaw::new(&half).unwrap();
        assert!(law.is_admissible(2) && law.is_admissible(3) && law.is_admissible(4));

        // <E12, E23, E13> is not BCH closed: the law construction refuses it.
        let unit = LieLattice::span(3, &[e(1, 2), e(2, 3), e(1, 3)]).unwrap();
        assert!(matches!(BchLaw::new(&unit), Err(MalcevError::NotClosed)));
    }

    #[test]
    fn class_three_law_admits_odd_moduli() {
        let n = 4;
        let u = |i, j| ExactMatrix::unit(n, i, j);
        let id = ExactMatrix::identity(n);
        let gens = [&id + &u(1, 2).scale(&rat(2, 1)), &id + &u(2, 3).scale(&rat(2, 1)), &id + &u(3, 4).scale(&rat(2, 1))];
        let closure = crate::malcev::lattice_closure(n, &gens).unwrap();
        let law = BchLaw::new(&closure.lattice).unwrap();
        assert!(law.is_admissible(3));
        assert!(law.is_admissible(5));
    }

    #[test]
    fn quotient_orders_and_inverses() {
        let l = lattice([2, 2, 2]);
        let law = BchLaw::new(&l).unwrap();
        for m in [2u64, 3, 4] {
            let q = LatticeQuotient::new(&law, m).unwrap();
            assert_eq!(q.order(), (m as usize).pow(3));
            for a in 0..q.order() {
                assert_eq!(q.mul(a, q.inv(a)), 0);
                assert_eq!(q.mul(0, a), a);
            }
        }
    }

    #[test]
    fn quotient_is_associative_exhaustively() {
        let l = lattice([1, 2, 1]);
        let law = BchLaw::new(&l).unwrap();
        let q = LatticeQuotient::new(&law, 4).unwrap();
        let n = q.order();
        for a in 0..n {
            for b in (0..n).step_by(3) {
                let ab = q.mul(a, b);
                for c in (0..n).step_by(5) {
                    assert_eq!(q.mul(ab, c), q.mul(a, q.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn oversized_quotients_are_refused() {
        let l = lattice([2, 2, 2]);
        let law = BchLaw::new(&l).unwrap();
        assert!(matches!(LatticeQuotient::new(&law, 1 << 10), Err(MalcevError::QuotientTooLarge { .. })));
    }
}
