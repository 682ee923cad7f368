mod common;

use common::{brute_countermodel, forces, VECTOR};
use freeha::decide::{decide, equiv, witness_refutes, DecideOptions, Verdict};
use freeha::formula::{parse_formula, random_formula, Formula};
use freeha::Limits;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nvars(f: &Formula) -> usize {
    f.max_var().max(1)
}

#[test]
fn fixed_vector_matches_known_status() {
    for (text, valid) in VECTOR {
        let f = parse_formula(text).unwrap();
        let r = decide(&f, nvars(&f), &DecideOptions::default()).unwrap();
        assert_eq!(r.verdict == Verdict::Valid, valid, "{text}");
        if !valid {
            assert!(
                witness_refutes(&f, &r, &Limits::default()).unwrap(),
                "{text}"
            );
        }
    }
}

#[test]
fn fixed_vector_matches_small_countermodels() {
    for (text, _) in VECTOR {
        let f = parse_formula(text).unwrap();
        let r = decide(&f, nvars(&f), &DecideOptions::default()).unwrap();
        let cm = brute_countermodel(&f, nvars(&f), 4);
        if let Some(m) = &cm {
            assert!(forces(m, &f).contains(&false));
        }
        assert_eq!(r.verdict == Verdict::Invalid, cm.is_some(), "{text}");
    }
}

#[test]
fn double_negation_shift_in_two_variables_needs_a_depth_override() {
    let f = parse_formula("(p1 -> ~~p2) -> ~~(p1 -> p2)").unwrap();
    assert_eq!(f.impl_depth(), 4);
    let err = decide(&f, 2, &DecideOptions::default()).unwrap_err();
    assert!(err.is_resource(), "{err}");
    let opts = DecideOptions {
        depth: Some(3),
        ..Default::default()
    };
    let r = decide(&f, 2, &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Valid);
    assert_eq!(r.depth, 3);
}

#[test]
fn equivalences() {
    let opts = DecideOptions::default();
    let p = |s| parse_formula(s).unwrap();
    assert_eq!(
        equiv(&p("~~~p1"), &p("~p1"), 1, &opts).unwrap().verdict,
        Verdict::Valid
    );
    assert_eq!(
        equiv(&p("~~p1"), &p("p1"), 1, &opts).unwrap().verdict,
        Verdict::Invalid
    );
    assert_eq!(
        equiv(&p("p1 -> p2 -> p1 & p2"), &p("true"), 2, &opts)
            .unwrap()
            .verdict,
        Verdict::Valid
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_countermodels_are_never_missed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 2, 3, 9);
        let r = decide(&f, 2, &DecideOptions::default()).unwrap();
        if brute_countermodel(&f, 2, 3).is_some() {
            prop_assert_eq!(r.verdict, Verdict::Invalid);
        }
        if r.verdict == Verdict::Invalid {
            prop_assert!(witness_refutes(&f, &r, &Limits::default()).unwrap());
        }
    }
}
