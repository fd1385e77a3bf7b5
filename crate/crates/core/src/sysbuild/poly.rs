//! Sparse multivariate polynomials with integer coefficients.

use rustc_hash::FxHashMap as HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

type Powers = SmallVec<[(u32, u32); 6]>;

/// Variable index with exponent, sorted by index, exponents positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Powers);

impl Monomial {
    pub fn one() -> Self {
        Self(Powers::new())
    }

    pub fn var(v: u32) -> Self {
        let mut p = Powers::new();
        p.push((v, 1));
        Self(p)
    }

    /// From `(variable, exponent)` pairs in any order; zero exponents dropped.
    pub fn from_powers(powers: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut m = Powers::new();
        for (v, e) in powers {
            if e == 0 {
                continue;
            }
            match m.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += e,
                None => m.push((v, e)),
            }
        }
        m.sort_unstable();
        Self(m)
    }

    pub fn powers(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Powers::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

/// A polynomial as a list of monomials with nonzero coefficients, sorted by
/// descending degree and then by variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: Vec<(Monomial, BigInt)>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_terms([(Monomial::one(), c.into())])
    }

    pub fn var(v: u32) -> Self {
        Self::from_terms([(Monomial::var(v), BigInt::one())])
    }

    /// Collects like terms and drops zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        let mut acc: HashMap<Monomial, BigInt> = HashMap::default();
        for (m, c) in terms {
            *acc.entry(m).or_default() += c;
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, BigInt>) -> Self {
        let mut terms: Vec<(Monomial, BigInt)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        sort_terms(&mut terms);
        Self { terms }
    }

    pub fn terms(&self) -> &[(Monomial, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map_or_else(BigInt::zero, |(_, c)| c.clone())
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Sorted, deduplicated variable indices.
    pub fn variables(&self) -> Vec<u32> {
        let mut vs: Vec<u32> = self.terms.iter().flat_map(|(m, _)| m.0.iter().map(|&(v, _)| v)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn max_variable(&self) -> Option<u32> {
        self.terms.iter().filter_map(|(m, _)| m.0.last().map(|&(v, _)| v)).max()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    /// `self + other` or `self - other`; both term lists share one total
    /// order, so a merge suffices.
    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let take_b = |t: &(Monomial, BigInt)| if negate { (t.0.clone(), -&t.1) } else { t.clone() };
        let mut terms = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match term_order(&a[i].0, &b[j].0) {
                std::cmp::Ordering::Less => {
                    terms.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    terms.push(take_b(&b[j]));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        terms.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend_from_slice(&a[i..]);
        terms.extend(b[j..].iter().map(take_b));
        Poly { terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        if k.is_one() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        Self::dot(&[(self, other)])
    }

    /// Sum of `a_k * b_k`, collected once at the end.
    pub fn dot(pairs: &[(&Poly, &Poly)]) -> Poly {
        Self::dot_small(pairs).unwrap_or_else(|| {
            let mut acc: HashMap<Monomial, BigInt> = HashMap::default();
            for (a, b) in pairs {
                for (ma, ca) in &a.terms {
                    for (mb, cb) in &b.terms {
                        *acc.entry(ma.mul(mb)).or_default() += ca * cb;
                    }
                }
            }
            Self::from_map(acc)
        })
    }

    /// Machine-word version of `dot`; `None` on any overflow.
    fn dot_small(pairs: &[(&Poly, &Poly)]) -> Option<Poly> {
        let small = |p: &Poly| -> Option<Vec<i64>> { p.terms.iter().map(|(_, c)| c.to_i64()).collect() };
        let mut acc: HashMap<Monomial, i128> = HashMap::default();
        for (a, b) in pairs {
            let (ca, cb) = (small(a)?, small(b)?);
            for ((ma, _), &x) in a.terms.iter().zip(&ca) {
                for ((mb, _), &y) in b.terms.iter().zip(&cb) {
                    let slot = acc.entry(ma.mul(mb)).or_default();
                    *slot = slot.checked_add(i128::from(x) * i128::from(y))?;
                }
            }
        }
        let mut terms: Vec<(Monomial, BigInt)> = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(m, c)| (m, BigInt::from(c)))
            .collect();
        sort_terms(&mut terms);
        Some(Poly { terms })
    }

    /// Gcd of all coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms.iter().fold(BigInt::zero(), |g, (_, c)| g.gcd(c))
    }

    /// Exact value at an integer point indexed by variable.
    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                t *= num_traits::pow(point[v as usize].clone(), e as usize);
            }
            total += t;
        }
        total
    }

    /// Partial derivative with respect to variable `v`.
    pub fn derivative(&self, v: u32) -> Poly {
        Self::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let pos = m.0.iter().position(|&(w, _)| w == v)?;
            let e = m.0[pos].1;
            let mut powers = m.0.clone();
            if e == 1 {
                powers.remove(pos);
            } else {
                powers[pos].1 -= 1;
            }
            Some((Monomial(powers), c * BigInt::from(e)))
        }))
    }

    /// Renames variables through `map` (old index to new index).
    pub fn relabel(&self, map: &[u32]) -> Poly {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (Monomial::from_powers(m.0.iter().map(|&(v, e)| (map[v as usize], e))), c.clone())),
        )
    }
}

fn term_order(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    b.degree().cmp(&a.degree()).then_with(|| a.cmp(b))
}

fn sort_terms(terms: &mut [(Monomial, BigInt)]) {
    terms.sort_unstable_by(|a, b| term_order(&a.0, &b.0));
}

/// A polynomial preprocessed for evaluation modulo `p^k` in machine words.
#[derive(Clone, Debug)]
pub(crate) struct ModPoly {
    terms: Vec<(Vec<(usize, u32)>, u128)>,
}

impl ModPoly {
    /// `modulus` must be below `2^63` so that products fit in `u128`.
    pub(crate) fn new(p: &Poly, modulus: u128) -> Self {
        let m = BigInt::from(modulus);
        let terms = p
            .terms
            .iter()
            .map(|(mono, c)| {
                let c = c.mod_floor(&m).to_u128().expect("reduced coefficient fits");
                (mono.0.iter().map(|&(v, e)| (v as usize, e)).collect(), c)
            })
            .filter(|(_, c)| *c != 0)
            .collect();
        Self { terms }
    }

    /// Value modulo `modulus`, which must divide the modulus used in `new`.
    pub(crate) fn eval(&self, point: &[u128], modulus: u128) -> u128 {
        let mut total = 0u128;
        for (mono, c) in &self.terms {
            let mut t = *c % modulus;
            for &(v, e) in mono {
                let x = point[v] % modulus;
                for _ in 0..e {
                    t = t * x % modulus;
                }
            }
            total = (total + t) % modulus;
        }
        total
    }
}

/// `p`-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while x.is_multiple_of(&p) {
        x /= &p;
        v += 1;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn arithmetic_collects_terms() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let s = x.add(&y);
        let sq = s.mul(&s);
        let expected = Poly::from_terms([
            (Monomial::from_powers([(0, 2)]), big(1)),
            (Monomial::from_powers([(0, 1), (1, 1)]), big(2)),
            (Monomial::from_powers([(1, 2)]), big(1)),
        ]);
        assert_eq!(sq, expected);
        assert!(s.sub(&s).is_zero());
        assert_eq!(sq.degree(), 2);
        assert_eq!(sq.variables(), vec![0, 1]);
    }

    #[test]
    fn evaluation_and_derivative() {
        // x^2 y - 3
        let p = Poly::from_terms([(Monomial::from_powers([(0, 2), (1, 1)]), big(1)), (Monomial::one(), big(-3))]);
        assert_eq!(p.eval(&[big(2), big(5)]), big(17));
        let dx = p.derivative(0);
        assert_eq!(dx.eval(&[big(2), big(5)]), big(20));
        let mp = ModPoly::new(&p, 49);
        assert_eq!(mp.eval(&[2, 5], 7), 3);
        assert_eq!(valuation(&big(-48), 2), Some(4));
        assert_eq!(valuation(&big(0), 3), None);
    }

    #[test]
    fn content_ignores_sign() {
        let p = Poly::from_terms([(Monomial::var(0), big(-4)), (Monomial::one(), big(6))]);
        assert_eq!(p.content(), big(2));
    }
}
