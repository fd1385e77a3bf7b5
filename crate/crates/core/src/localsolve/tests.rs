use num_bigint::BigInt;
use proptest::prelude::*;

use super::*;
use crate::exactmat::{ExactMatrix, Matrix};
use crate::malcev::lattice_closure;
use crate::scalar::rat;
use crate::sysbuild::{build_lie_system, parse_system, Monomial, Poly, Tag, TaggedPoly};

fn doc(vars: &[&str], polys: &[&str]) -> DiophantineSystem {
    let mut text = String::from("dio v1\nmeta n=1 nprime=1 r=0 rprime=0 d=0 s=0 good=1\n");
    for v in vars {
        text.push_str(&format!("var {v}\n"));
    }
    for p in polys {
        text.push_str(&format!("poly Beq: {p}\n"));
    }
    parse_system(&text).unwrap()
}

fn ints(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn single() -> Selection {
    Selection {
        equations: vec![0],
        variables: vec![0],
    }
}

#[test]
fn sqrt2_exists_in_z7() {
    let sys = doc(&["x"], &["x^2 - 2"]);
    let report = decide_prime(&sys, 7, &LocalConfig::default()).unwrap();
    match report.verdict {
        PrimeVerdict::CertifiedSolvable {
            certificate: Certificate::Hensel(cert),
        } => {
            assert_eq!(cert.e, 0);
            assert_eq!(cert.point, ints(&[3]));
            assert!(reverify(&sys, &cert));
        }
        v => panic!("unexpected {v:?}"),
    }
}

#[test]
fn sqrt2_missing_in_z5() {
    let sys = doc(&["x"], &["x^2 - 2"]);
    let report = decide_prime(&sys, 5, &LocalConfig::default()).unwrap();
    assert_eq!(report.verdict, PrimeVerdict::CertifiedUnsolvable { level: 1 });
}

#[test]
fn sqrt17_in_z2_needs_e1() {
    let sys = doc(&["x"], &["x^2 - 17"]);
    assert!(matches!(
        hensel_certificate(&sys, &ints(&[1]), &single(), 2, 0),
        Ok(None)
    ));
    let cert = hensel_certificate(&sys, &ints(&[1]), &single(), 2, 1).unwrap().unwrap();
    assert_eq!(cert.valuation, 1);
    assert!(reverify(&sys, &cert));
    let report = decide_prime(&sys, 2, &LocalConfig::default()).unwrap();
    assert!(report.verdict.is_certified_solvable());
}

#[test]
fn sqrt2_in_z2_has_no_certificate() {
    let sys = doc(&["x"], &["x^2 - 2"]);
    // x = 0 vanishes modulo 2 but not modulo 8.
    assert_eq!(
        hensel_certificate(&sys, &ints(&[0]), &single(), 2, 1),
        Err(LocalError::VanishingFails { level: 3 })
    );
    let report = decide_prime(&sys, 2, &LocalConfig::default()).unwrap();
    assert!(report.verdict.is_certified_unsolvable());
}

#[test]
fn certificate_errors() {
    let sys = doc(&["x", "y"], &["x - y"]);
    let bad = Selection {
        equations: vec![0],
        variables: vec![0, 1],
    };
    assert!(matches!(
        hensel_certificate(&sys, &ints(&[0, 0]), &bad, 3, 0),
        Err(LocalError::NonSquareSelection { equations: 1, variables: 2 })
    ));
    let out = Selection {
        equations: vec![0],
        variables: vec![5],
    };
    assert_eq!(
        hensel_certificate(&sys, &ints(&[0, 0]), &out, 3, 0),
        Err(LocalError::SelectionOutOfRange(5))
    );
}

#[test]
fn search_examples() {
    let budget = Budget::default();
    let none = solutions_mod(&doc(&["x"], &["x^2 + 1"]), 3, 1, &budget).unwrap();
    assert!(none.points.is_empty() && none.exhaustive);
    let two = solutions_mod(&doc(&["x"], &["x^2 - 2"]), 7, 1, &budget).unwrap();
    assert_eq!(two.points, vec![vec![3], vec![4]]);
    let empty = solutions_mod(&doc(&["x", "y"], &[]), 2, 1, &budget).unwrap();
    assert_eq!(empty.points.len(), 4);
    assert!(matches!(solutions_mod(&empty_system(), 4, 1, &budget), Err(LocalError::NotPrime(4))));
    assert!(matches!(solutions_mod(&empty_system(), 2, 0, &budget), Err(LocalError::ZeroLevel)));
    assert!(matches!(
        solutions_mod(&empty_system(), 2, 63, &budget),
        Err(LocalError::ModulusTooLarge { .. })
    ));
}

fn empty_system() -> DiophantineSystem {
    doc(&[], &[])
}

#[test]
fn constant_contradiction_is_unsolvable_everywhere() {
    let mut sys = empty_system();
    sys.polys.push(TaggedPoly {
        tag: Tag::Const,
        poly: Poly::constant(1),
    });
    let report = decide_local(&sys, &[2, 3], &LocalConfig::default()).unwrap();
    assert_eq!(report.overall, Overall::NotLocallySolvable { prime: 2 });
}

#[test]
fn node_budget_gives_unknown() {
    let sys = doc(&["x", "y", "z"], &["x^2 + y^2 + z^2 - 7"]);
    let config = LocalConfig {
        budget: Budget {
            max_nodes: 3,
            ..Budget::default()
        },
        hints: Vec::new(),
    };
    let report = decide_prime(&sys, 2, &config).unwrap();
    assert!(matches!(report.verdict, PrimeVerdict::Unknown { .. }));
}

#[test]
fn linear_system_has_exact_witness() {
    let sys = doc(&["x"], &["x - 1"]);
    let report = decide_prime(&sys, 3, &LocalConfig::default()).unwrap();
    assert_eq!(
        report.verdict,
        PrimeVerdict::CertifiedSolvable {
            certificate: Certificate::Exact { witness: ints(&[1]) }
        }
    );
}

#[test]
fn hints_settle_every_prime() {
    let sys = doc(&["x", "y"], &["x*y - 6", "x + y - 5"]);
    let config = LocalConfig {
        budget: Budget::default(),
        hints: vec![Witness::exact(ints(&[2, 3]))],
    };
    let report = decide_local(&sys, &[2, 3, 5, 7], &config).unwrap();
    assert_eq!(report.overall, Overall::LocallySolvableOnSet);
    assert!(report.verdicts.iter().all(|r| r.nodes == 0));
}

#[test]
fn aggregate_reports_first_failing_prime() {
    let sys = doc(&["x"], &["x^2 - 2"]);
    let report = decide_local(&sys, &[2, 3, 5, 7], &LocalConfig::default()).unwrap();
    assert_eq!(report.overall, Overall::NotLocallySolvable { prime: 2 });
    assert!(report.verdicts[1].verdict.is_certified_unsolvable());
    assert!(report.verdicts[3].verdict.is_certified_solvable());
    assert!(!report.primes_outside_set_examined);
    assert!(matches!(
        decide_local(&sys, &[2, 9], &LocalConfig::default()),
        Err(LocalError::NotPrime(9))
    ));
}

#[test]
fn default_primes_include_factors() {
    let primes = default_primes(&[BigInt::from(2 * 101 * 101), BigInt::from(-103)]);
    assert_eq!(primes[0], 2);
    assert!(primes.contains(&101) && primes.contains(&103) && primes.contains(&97));
    assert!(!primes.contains(&99));
}

fn heisenberg_lattice(b: i64) -> crate::malcev::LieLattice {
    let unit = |i: usize, j: usize, c: i64| &ExactMatrix::identity(3) + &Matrix::unit(3, i, j).scale(&rat(c, 1));
    lattice_closure(3, &[unit(1, 2, 1), unit(2, 3, b), unit(1, 3, 1)]).unwrap().lattice
}

#[test]
fn lie_obstruction_between_n2_and_n4_at_level_two() {
    let sys = build_lie_system(&heisenberg_lattice(2), &heisenberg_lattice(4)).unwrap();
    let report = decide_prime(&sys, 2, &LocalConfig::default()).unwrap();
    assert_eq!(report.verdict, PrimeVerdict::CertifiedUnsolvable { level: 2 });
    // Odd primes see no obstruction.
    let odd = decide_prime(&sys, 3, &LocalConfig::default()).unwrap();
    assert!(!odd.verdict.is_certified_unsolvable());
}

#[test]
fn auto_selection_finds_rank() {
    let sys = doc(&["x", "y", "z"], &["x + y - 2", "2*x + 2*y - 4", "z^2 - 1"]);
    let sel = auto_selection(&sys, &ints(&[1, 1, 1]), 3);
    assert_eq!(sel.equations.len(), 2);
    assert!(sel.variables.contains(&2));
}

// Oracle: brute-force enumeration of all residues modulo p^k.
fn brute_force(sys: &DiophantineSystem, p: u64, k: u32) -> Vec<Vec<u128>> {
    let m = u128::from(p).pow(k);
    let n = sys.variables.len();
    let mut out = Vec::new();
    let total = m.pow(n as u32);
    for code in 0..total {
        let x: Vec<u128> = (0..n).map(|i| (code / m.pow(i as u32)) % m).collect();
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        let mb = BigInt::from(m);
        if sys.polys.iter().all(|tp| {
            let r = tp.poly.eval(&big) % &mb;
            r == BigInt::from(0)
        }) {
            out.push(x);
        }
    }
    out.sort();
    out
}

fn small_system() -> impl Strategy<Value = DiophantineSystem> {
    let term = (-4i64..=4, 0u32..=2, 0u32..=2);
    let poly = proptest::collection::vec(term, 1..4);
    proptest::collection::vec(poly, 1..3).prop_map(|polys| DiophantineSystem {
        meta: Default::default(),
        variables: vec!["x".into(), "y".into()],
        polys: polys
            .into_iter()
            .map(|terms| TaggedPoly {
                tag: Tag::Beq,
                poly: Poly::from_terms(terms.into_iter().map(|(c, a, b)| {
                    (
                        Monomial::from_powers([(0, a), (1, b)].into_iter().filter(|&(_, e)| e > 0)),
                        BigInt::from(c),
                    )
                })),
            })
            .collect(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_matches_brute_force(sys in small_system(), p in prop::sample::select(vec![2u64, 3, 5]), k in 1u32..=2) {
        let budget = Budget { max_points: usize::MAX, ..Budget::default() };
        let set = solutions_mod(&sys, p, k, &budget).unwrap();
        prop_assert!(set.exhaustive);
        let mut found = set.points.clone();
        found.sort();
        prop_assert_eq!(found, brute_force(&sys, p, k));
    }

    #[test]
    fn emptiness_is_monotone_in_level(sys in small_system(), p in prop::sample::select(vec![2u64, 3])) {
        let budget = Budget::default();
        let mut empty = false;
        for k in 1..=3 {
            let set = solutions_mod(&sys, p, k, &budget).unwrap();
            if empty {
                prop_assert!(set.points.is_empty());
            }
            empty = set.points.is_empty();
        }
    }

    #[test]
    fn certified_verdicts_agree_with_oracle(sys in small_system(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let report = decide_prime(&sys, p, &LocalConfig::default()).unwrap();
        if let PrimeVerdict::CertifiedUnsolvable { level } = report.verdict {
            prop_assert!(brute_force(&sys, p, level).is_empty());
        }
        if let PrimeVerdict::CertifiedSolvable { certificate: Certificate::Hensel(cert) } = &report.verdict {
            prop_assert!(reverify(&sys, cert));
        }
        if report.verdict.is_certified_solvable() {
            prop_assert!(!brute_force(&sys, p, 2).is_empty());
        }
    }
}
