//! Property tests for the invariants each module promises.

mod common;

use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::{corpus, isomorphic_rewrites, q, read_instance, shear, unit};
use vpiso_core::decider::{decide, parse_instance, theta_system, DecideConfig};
use vpiso_core::exactmat::{hermite_form, hermite_solve, nilpotent_exp, smith_invariants, unipotent_log};
use vpiso_core::localsolve::{decide_local, LocalConfig, Overall};
use vpiso_core::malcev::{bch, fingerprint, lattice_closure, LieLattice, TGroupRep};
use vpiso_core::sysbuild::verify_witness;
use vpiso_core::words::{derived_word, eval_word, Letter, Word};
use vpiso_core::{BigInt, ExactMatrix, IntMatrix};

fn unitriangular(n: usize, entries: &[i64]) -> ExactMatrix {
    let mut m = ExactMatrix::identity(n);
    let mut it = entries.iter().cycle();
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = q(*it.next().unwrap());
        }
    }
    m
}

fn lcm_upto(k: usize) -> BigInt {
    (1..=k.max(1)).fold(BigInt::one(), |acc, i| acc.lcm(&BigInt::from(i)))
}

fn factorial(k: usize) -> BigInt {
    (1..=k.max(1)).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn denominators_divide(m: &ExactMatrix, bound: &BigInt) -> bool {
    m.entries().iter().all(|x| (bound % x.denom()).is_zero())
}

fn unipotent() -> impl Strategy<Value = ExactMatrix> {
    (1usize..=6, proptest::collection::vec(-10i64..=10, 15), any::<bool>()).prop_map(|(n, entries, conj)| {
        let m = unitriangular(n, &entries);
        if conj {
            let p = shear(n);
            &(&p.inverse().unwrap() * &m) * &p
        } else {
            m
        }
    })
}

fn int_rows(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-12i64..=12, c), r)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    })
}

fn word(d: usize, max_len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec((1..=d, any::<bool>()), 0..=max_len)
        .prop_map(|ls| Word(ls.into_iter().map(|(i, inv)| Letter::new(i, inv)).collect()))
}

fn heisenberg2() -> LieLattice {
    let two = q(2);
    LieLattice::span(3, &[unit(3, 1, 2).scale(&two), unit(3, 2, 3).scale(&two), unit(3, 1, 3).scale(&two)]).unwrap()
}

/// Sign pattern and unitriangular entries of a normalizer of `heisenberg2`.
fn normalizer(signs: [bool; 3], entries: &[i64]) -> ExactMatrix {
    let mut d = ExactMatrix::identity(3);
    for (i, &s) in signs.iter().enumerate() {
        if s {
            d[(i, i)] = q(-1);
        }
    }
    &d * &unitriangular(3, entries)
}

fn small_unipotent_gens(n: usize) -> impl Strategy<Value = Vec<ExactMatrix>> {
    proptest::collection::vec(proptest::collection::vec(-2i64..=2, n * (n - 1) / 2), 1..=3)
        .prop_map(move |gs| gs.iter().map(|e| unitriangular(n, e)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_exp_roundtrip_with_bounded_denominators(m in unipotent()) {
        let n = m.rows();
        let log = unipotent_log(&m).unwrap();
        prop_assert_eq!(&nilpotent_exp(&log).unwrap(), &m);
        prop_assert!(denominators_divide(&log, &lcm_upto(n.saturating_sub(1))));
        let exp = nilpotent_exp(&log.scale(&q(3))).unwrap();
        prop_assert!(denominators_divide(&exp, &factorial(n.saturating_sub(1))));
        prop_assert_eq!(unipotent_log(&exp).unwrap(), log.scale(&q(3)));
    }

    #[test]
    fn hermite_is_idempotent_and_spans_the_input(rows in int_rows(5, 5)) {
        let h = hermite_form(&rows);
        prop_assert_eq!(&hermite_form(&h), &h);
        for r in &rows {
            prop_assert!(hermite_solve(&h, r).is_some());
        }
        // The input already spans `h` iff adding `h` leaves the form unchanged.
        let mut both = rows.clone();
        both.extend(h.iter().cloned());
        prop_assert_eq!(hermite_form(&both), h);
    }

    #[test]
    fn smith_ignores_permutations_and_signs(
        rows in int_rows(4, 4),
        seed in any::<u64>(),
    ) {
        let r = rows.len();
        let c = rows[0].len();
        let row_perm: Vec<usize> = (0..r).map(|i| (i + seed as usize) % r).rev().collect();
        let col_perm: Vec<usize> = (0..c).map(|j| (j + (seed >> 8) as usize) % c).collect();
        let flip = |bit: usize| (seed >> (16 + bit)) & 1 == 1;
        let moved: Vec<Vec<BigInt>> = row_perm
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                col_perm
                    .iter()
                    .enumerate()
                    .map(|(l, &j)| if flip(k) != flip(8 + l) { -rows[i][j].clone() } else { rows[i][j].clone() })
                    .collect()
            })
            .collect();
        prop_assert_eq!(
            smith_invariants(&IntMatrix::from_rows(moved).unwrap()),
            smith_invariants(&IntMatrix::from_rows(rows).unwrap())
        );
    }

    #[test]
    fn twisted_word_identity(
        d in 1usize..=3,
        w in word(3, 12),
        vc in proptest::collection::vec(-3i64..=3, 9),
        signs in any::<[[bool; 3]; 3]>(),
        he in proptest::collection::vec(-3i64..=3, 9),
    ) {
        let w = Word(w.letters().iter().map(|l| Letter::new((l.index - 1) % d + 1, l.inverse)).collect());
        let l = heisenberg2();
        let v: Vec<ExactMatrix> = (0..d)
            .map(|i| {
                let c: Vec<BigInt> = vc[3 * i..3 * i + 3].iter().map(|&x| BigInt::from(x)).collect();
                nilpotent_exp(&l.element(&c)).unwrap()
            })
            .collect();
        let h: Vec<ExactMatrix> = (0..d).map(|i| normalizer(signs[i], &he[3 * i..3 * i + 3])).collect();
        let vh: Vec<ExactMatrix> = v.iter().zip(&h).map(|(a, b)| a * b).collect();
        let tw = derived_word(&w);
        let rhs = &tw.eval_factors(&v, &h).unwrap() * &eval_word(&w, &h).unwrap();
        prop_assert_eq!(eval_word(&w, &vh).unwrap(), rhs);
    }

    #[test]
    fn derived_factors_follow_the_source_word(w in word(3, 12)) {
        let tw = derived_word(&w);
        prop_assert_eq!(tw.factors.len(), w.len());
        for (m, (f, l)) in tw.factors.iter().zip(w.letters()).enumerate() {
            prop_assert_eq!((f.target, f.inverse), (l.index, l.inverse));
            // The conjugator is the inverse of a prefix of `w`.
            let prefix_len = if l.inverse { m + 1 } else { m };
            prop_assert_eq!(f.conjugator.inverse(), Word(w.letters()[..prefix_len].to_vec()));
        }
    }

    #[test]
    fn evaluation_ignores_free_reduction(
        w in word(3, 10),
        at in 0usize..=10,
        letter in (1usize..=3, any::<bool>()),
        entries in proptest::collection::vec(-3i64..=3, 9),
    ) {
        let gens: Vec<ExactMatrix> = (0..3).map(|i| unitriangular(3, &entries[3 * i..3 * i + 3])).collect();
        let l = Letter::new(letter.0, letter.1);
        let mut padded = w.letters().to_vec();
        let at = at.min(padded.len());
        padded.splice(at..at, [l, l.inv()]);
        let padded = Word(padded);
        let value = eval_word(&w, &gens).unwrap();
        prop_assert_eq!(&eval_word(&padded, &gens).unwrap(), &value);
        prop_assert_eq!(&eval_word(&padded.reduced(), &gens).unwrap(), &value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closure_ignores_generator_order(gens in small_unipotent_gens(4)) {
        let forward = lattice_closure(4, &gens).unwrap();
        let mut rev = gens.clone();
        rev.reverse();
        let backward = lattice_closure(4, &rev).unwrap();
        prop_assert_eq!(&forward, &backward);
    }

    #[test]
    fn closed_lattices_are_closed_under_products(
        gens in small_unipotent_gens(4),
        xs in proptest::collection::vec(-3i64..=3, 12),
    ) {
        let l = lattice_closure(4, &gens).unwrap().lattice;
        let r = l.rank();
        prop_assume!(r > 0);
        let x = l.element(&xs[..r].iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
        let y = l.element(&xs[6..6 + r].iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
        prop_assert!(l.membership(&nilpotent_exp(&bch(&x, &y).unwrap()).unwrap()).is_some());
        let prod = &nilpotent_exp(&x).unwrap() * &nilpotent_exp(&y).unwrap();
        prop_assert!(l.membership(&prod).is_some());
    }

    #[test]
    fn fingerprint_survives_conjugation_and_rebasing(
        gens in small_unipotent_gens(3),
        ops in proptest::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..4),
    ) {
        let g = TGroupRep::new(3, gens.clone(), true).unwrap();
        let moduli = g.admissible_moduli(4).unwrap();
        let base = fingerprint(&g, &moduli).unwrap();

        let p = shear(3);
        let pinv = p.inverse().unwrap();
        let conj: Vec<ExactMatrix> = g.generators().iter().map(|x| &(&pinv * x) * &p).collect();
        let conj = TGroupRep::new(3, conj, true).unwrap();
        prop_assert_eq!(conj.admissible_moduli(4).unwrap(), moduli.clone());
        prop_assert_eq!(&fingerprint(&conj, &moduli).unwrap(), &base);

        // Elementary row operations on the lattice basis.
        let mut basis = g.lattice().basis();
        for (i, j, c) in ops {
            if i < basis.len() && j < basis.len() && i != j {
                basis[i] = &basis[i] + &basis[j].scale(&q(c));
            }
        }
        let rebased: Vec<ExactMatrix> = basis.iter().map(|x| nilpotent_exp(x).unwrap()).collect();
        let rebased = TGroupRep::new(3, rebased, false).unwrap();
        prop_assert_eq!(rebased.lattice(), g.lattice());
        prop_assert_eq!(&fingerprint(&rebased, &moduli).unwrap(), &base);
    }
}

#[test]
fn identity_witness_is_stable_under_relabelling() {
    for name in ["self_heisenberg.vpiso", "z_times_z2.vpiso", "abelian_rank2.vpiso"] {
        let inst = parse_instance(&read_instance(name)).unwrap();
        for (label, text) in isomorphic_rewrites(&inst) {
            if !label.starts_with("rotate") && !label.starts_with("invert") {
                continue;
            }
            let other = parse_instance(&text).unwrap();
            let mut stream =
                vpiso_core::decider::enumerate_theta(&other.g, &other.gdag, 1, None).unwrap();
            let theta = stream.next().unwrap();
            let data = theta_system(&other, &theta).unwrap().unwrap();
            let w = data.witness.unwrap_or_else(|| panic!("{name} / {label}: no witness"));
            assert!(verify_witness(&data.system, &w).unwrap().all_zero, "{name} / {label}");
            let config = LocalConfig {
                hints: vec![w],
                ..LocalConfig::default()
            };
            let report = decide_local(&data.system, &[2, 3], &config).unwrap();
            assert_eq!(report.overall, Overall::LocallySolvableOnSet, "{name} / {label}");
        }
    }
}

#[test]
fn prime_order_does_not_change_verdicts() {
    let inst = parse_instance(&read_instance("n2_vs_n4.vpiso")).unwrap();
    let sys = vpiso_core::sysbuild::build_lie_system(inst.g.group.lattice(), inst.gdag.group.lattice()).unwrap();
    let config = LocalConfig::default();
    let up = decide_local(&sys, &[2, 3, 5], &config).unwrap();
    let down = decide_local(&sys, &[5, 3, 2], &config).unwrap();
    let mut a = up.verdicts.clone();
    let mut b = down.verdicts.clone();
    a.sort_by_key(|r| r.prime);
    b.sort_by_key(|r| r.prime);
    assert_eq!(a, b);
    assert_eq!(up.overall, down.overall);
}

#[test]
fn decisions_are_deterministic() {
    let config = DecideConfig::default();
    for (name, text) in corpus() {
        let inst = parse_instance(&text).unwrap();
        let a = serde_json::to_value(decide(&inst, &config).unwrap()).unwrap();
        let b = serde_json::to_value(decide(&inst, &config).unwrap()).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
