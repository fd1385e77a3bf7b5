//! Small finite groups given by a multiplication oracle on `0..order`.

use std::collections::BTreeMap;

use num_integer::Integer;

pub trait FiniteGroup {
    fn order(&self) -> usize;
    fn identity(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;

    fn commutator(&self, a: usize, b: usize) -> usize {
        // a^{-1} b^{-1} a b
        let ai = self.inv(a);
        let bi = self.inv(b);
        self.mul(self.mul(ai, bi), self.mul(a, b))
    }

    fn conjugate(&self, a: usize, by: usize) -> usize {
        self.mul(self.mul(self.inv(by), a), by)
    }

    fn element_order(&self, a: usize) -> u64 {
        let e = self.identity();
        let mut x = a;
        let mut k = 1;
        while x != e {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }
}

/// Subgroup stored as a membership bitmap plus a generating set.
#[derive(Clone, Debug)]
pub struct Subgroup {
    members: Vec<bool>,
    size: usize,
    gens: Vec<usize>,
}

impl Subgroup {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, a: usize) -> bool {
        self.members[a]
    }

    pub fn gens(&self) -> &[usize] {
        &self.gens
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn is_trivial(&self) -> bool {
        self.size == 1
    }
}

/// Subgroup generated by `gens`; in a finite group positive words suffice.
pub fn generate<G: FiniteGroup + ?Sized>(g: &G, gens: &[usize]) -> Subgroup {
    let mut members = vec![false; g.order()];
    let e = g.identity();
    members[e] = true;
    let mut queue = vec![e];
    let mut size = 1;
    while let Some(x) = queue.pop() {
        for &s in gens {
            let y = g.mul(x, s);
            if !members[y] {
                members[y] = true;
                size += 1;
                queue.push(y);
            }
        }
    }
    let gens = gens.iter().copied().filter(|&s| s != e).collect();
    Subgroup {
        members,
        size,
        gens,
    }
}

/// Extends `base` by `candidates` one at a time, keeping only elements that
/// enlarge the subgroup.
fn extend<G: FiniteGroup + ?Sized>(
    g: &G,
    mut base: Subgroup,
    candidates: impl IntoIterator<Item = usize>,
) -> Subgroup {
    for c in candidates {
        if !base.contains(c) {
            let mut gens = base.gens.clone();
            gens.push(c);
            base = generate(g, &gens);
        }
    }
    base
}

pub fn whole_group<G: FiniteGroup + ?Sized>(g: &G) -> Subgroup {
    extend(g, generate(g, &[]), 0..g.order())
}

/// Normal closure of `seeds` under conjugation by `ambient_gens`.
pub fn normal_closure<G: FiniteGroup + ?Sized>(
    g: &G,
    seeds: &[usize],
    ambient_gens: &[usize],
) -> Subgroup {
    let mut h = extend(g, generate(g, &[]), seeds.iter().copied());
    loop {
        let conjugates: Vec<usize> = h
            .gens
            .iter()
            .flat_map(|&x| ambient_gens.iter().map(move |&s| (x, s)))
            .map(|(x, s)| g.conjugate(x, s))
            .filter(|&c| !h.contains(c))
            .collect();
        if conjugates.is_empty() {
            return h;
        }
        h = extend(g, h, conjugates);
    }
}

/// Lower central series `G = g_1 > g_2 > ... > 1`, ending with the trivial
/// group. Stops after `max_terms` for non-nilpotent inputs.
pub fn lower_central_series<G: FiniteGroup + ?Sized>(g: &G, max_terms: usize) -> Vec<Subgroup> {
    let top = whole_group(g);
    let ambient = top.gens.clone();
    let mut series = vec![top];
    while series.len() < max_terms {
        let last = series.last().expect("nonempty");
        if last.is_trivial() {
            break;
        }
        let seeds: Vec<usize> = last
            .gens
            .iter()
            .flat_map(|&a| ambient.iter().map(move |&b| (a, b)))
            .map(|(a, b)| g.commutator(a, b))
            .collect();
        let next = normal_closure(g, &seeds, &ambient);
        if next.size == last.size {
            break;
        }
        series.push(next);
    }
    series
}

/// Nilpotency class, or `None` if the lower central series stabilises above
/// the trivial group.
pub fn nilpotency_class<G: FiniteGroup + ?Sized>(g: &G) -> Option<usize> {
    let series = lower_central_series(g, 64);
    series
        .last()
        .filter(|s| s.is_trivial())
        .map(|_| series.len() - 1)
}

pub fn order_histogram<G: FiniteGroup + ?Sized>(g: &G) -> BTreeMap<u64, u64> {
    let mut hist = BTreeMap::new();
    for a in 0..g.order() {
        *hist.entry(g.element_order(a)).or_insert(0) += 1;
    }
    hist
}

pub fn exponent(hist: &BTreeMap<u64, u64>) -> u64 {
    hist.keys().fold(1, |acc, &o| acc.lcm(&o))
}

/// Invariant factors of `G / [G, G]`.
pub fn abelianization_invariants<G: FiniteGroup + ?Sized>(g: &G) -> Vec<u64> {
    let top = whole_group(g);
    let seeds: Vec<usize> = top
        .gens
        .iter()
        .flat_map(|&a| top.gens.iter().map(move |&b| (a, b)))
        .map(|(a, b)| g.commutator(a, b))
        .collect();
    let derived = normal_closure(g, &seeds, &top.gens);
    // Orders of cosets x[G,G]; each coset is counted |[G,G]| times.
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for a in 0..g.order() {
        let mut x = a;
        let mut k = 1u64;
        while !derived.contains(x) {
            x = g.mul(x, a);
            k += 1;
        }
        *hist.entry(k).or_insert(0) += 1;
    }
    let size = derived.size as u64;
    hist.values_mut().for_each(|c| *c /= size);
    invariant_factors_from_orders(&hist)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Recovers the invariant factors of a finite abelian group from the number
/// of elements of each order.
///
/// For the `p`-part with cyclic factors `p^{a_1}, p^{a_2}, ...`, the number of
/// solutions of `x^{p^j} = 1` is `p^{sum_i min(j, a_i)}`.
pub fn invariant_factors_from_orders(hist: &BTreeMap<u64, u64>) -> Vec<u64> {
    let order: u64 = hist.values().sum();
    let mut primary: Vec<(u64, Vec<u32>)> = Vec::new();
    for p in prime_factors(order) {
        let count_dividing = |q: u64| -> u64 {
            hist.iter()
                .filter(|(&o, _)| q.is_multiple_of(o) && (o == 1 || prime_factors(o) == [p]))
                .map(|(_, &c)| c)
                .sum()
        };
        let log_p = |mut x: u64| -> u32 {
            let mut k = 0;
            while x > 1 {
                x /= p;
                k += 1;
            }
            k
        };
        // at_least[j] = number of cyclic factors of exponent >= j
        let mut parts: Vec<u32> = Vec::new();
        let mut prev = 0;
        let mut j = 1u32;
        loop {
            let cur = log_p(count_dividing(p.pow(j)));
            let at_least = cur - prev;
            if at_least == 0 {
                break;
            }
            parts.push(at_least);
            prev = cur;
            j += 1;
        }
        // Convert counts "number of parts >= j" into the partition.
        let k = parts.first().copied().unwrap_or(0) as usize;
        let mut exps = vec![0u32; k];
        for (jm1, &cnt) in parts.iter().enumerate() {
            for e in exps.iter_mut().take(cnt as usize) {
                *e = jm1 as u32 + 1;
            }
        }
        primary.push((p, exps));
    }
    let len = primary.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    // exps are descending; the largest invariant factor collects the
    // largest prime powers.
    let mut factors = vec![1u64; len];
    for (p, exps) in &primary {
        for (i, &e) in exps.iter().enumerate() {
            factors[len - 1 - i] *= p.pow(e);
        }
    }
    factors.retain(|&d| d > 1);
    factors
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Z/a x Z/b with componentwise addition.
    struct Product(u64, u64);

    impl FiniteGroup for Product {
        fn order(&self) -> usize {
            (self.0 * self.1) as usize
        }
        fn identity(&self) -> usize {
            0
        }
        fn mul(&self, a: usize, b: usize) -> usize {
            let (a0, a1) = (a as u64 % self.0, a as u64 / self.0);
            let (b0, b1) = (b as u64 % self.0, b as u64 / self.0);
            (((a0 + b0) % self.0) + self.0 * ((a1 + b1) % self.1)) as usize
        }
        fn inv(&self, a: usize) -> usize {
            let (a0, a1) = (a as u64 % self.0, a as u64 / self.0);
            (((self.0 - a0) % self.0) + self.0 * ((self.1 - a1) % self.1)) as usize
        }
    }

    /// Symmetric group S3 via an explicit permutation table.
    struct S3 {
        perms: Vec<[usize; 3]>,
    }

    impl S3 {
        fn new() -> Self {
            let perms = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
            Self { perms }
        }
        fn index(&self, p: [usize; 3]) -> usize {
            self.perms.iter().position(|&q| q == p).unwrap()
        }
    }

    impl FiniteGroup for S3 {
        fn order(&self) -> usize {
            6
        }
        fn identity(&self) -> usize {
            0
        }
        fn mul(&self, a: usize, b: usize) -> usize {
            let (p, q) = (self.perms[a], self.perms[b]);
            self.index([q[p[0]], q[p[1]], q[p[2]]])
        }
        fn inv(&self, a: usize) -> usize {
            let p = self.perms[a];
            let mut inv = [0; 3];
            for (i, &pi) in p.iter().enumerate() {
                inv[pi] = i;
            }
            self.index(inv)
        }
    }

    #[test]
    fn abelian_product_invariants() {
        assert_eq!(abelianization_invariants(&Product(2, 3)), vec![6]);
        assert_eq!(abelianization_invariants(&Product(2, 4)), vec![2, 4]);
        assert_eq!(abelianization_invariants(&Product(6, 4)), vec![2, 12]);
        assert_eq!(nilpotency_class(&Product(4, 4)), Some(1));
        assert_eq!(exponent(&order_histogram(&Product(4, 6))), 12);
    }

    #[test]
    fn symmetric_group_is_not_nilpotent() {
        let s3 = S3::new();
        assert_eq!(nilpotency_class(&s3), None);
        assert_eq!(abelianization_invariants(&s3), vec![2]);
        let hist = order_histogram(&s3);
        assert_eq!(hist, BTreeMap::from([(1, 1), (2, 3), (3, 2)]));
    }

    #[test]
    fn trivial_group() {
        let t = Product(1, 1);
        assert_eq!(nilpotency_class(&t), Some(0));
        assert!(abelianization_invariants(&t).is_empty());
    }

    #[test]
    fn invariant_factor_recovery() {
        // Z/2 x Z/4 x Z/3: orders 1:1, 2:3, 4:4, 3:2, 6:6, 12:8
        let hist = BTreeMap::from([(1, 1), (2, 3), (4, 4), (3, 2), (6, 6), (12, 8)]);
        assert_eq!(invariant_factors_from_orders(&hist), vec![2, 12]);
    }
}
