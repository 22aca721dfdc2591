mod common;

use std::collections::BTreeSet;

use asplearn_core::preference::{
    dominates, score_at_level, table_dominates, weak_tuples, Preference, ScoreTable, WeakTuple,
};
use asplearn_core::{answer_sets, extends, ground, is_answer_set, parse_program, AnswerSet, Interpretation, PartialInterpretation, Term};
use proptest::prelude::*;

fn interp(atoms: &[&str]) -> Interpretation {
    atoms.iter().map(|a| a.parse().unwrap()).collect()
}

const P: &str = "coin(1..2). 1 { val(C, h); val(C, t) } 1 :- coin(C).";
const C1: &str = "val(1, V) :- val(2, V).";
const C2: &str = ":- val(1, V), val(2, V).";

fn solve(text: &str) -> BTreeSet<AnswerSet> {
    answer_sets(&ground(&parse_program(text).unwrap(), 1000).unwrap(), 0)
        .unwrap()
        .into_iter()
        .collect()
}

#[test]
fn coin_program_with_first_context() {
    let expected = BTreeSet::from([
        interp(&["coin(1)", "coin(2)", "val(1,h)", "val(2,h)"]),
        interp(&["coin(1)", "coin(2)", "val(1,t)", "val(2,t)"]),
    ]);
    assert_eq!(solve(&format!("{P} {C1}")), expected);
}

#[test]
fn coin_program_with_second_context() {
    let expected = BTreeSet::from([
        interp(&["coin(1)", "coin(2)", "val(1,h)", "val(2,t)"]),
        interp(&["coin(1)", "coin(2)", "val(1,t)", "val(2,h)"]),
    ]);
    assert_eq!(solve(&format!("{P} {C2}")), expected);
    let g = ground(&parse_program(&format!("{P} {C2}")).unwrap(), 100).unwrap();
    assert!(is_answer_set(&g, &interp(&["coin(1)", "coin(2)", "val(1,h)", "val(2,t)"])));
}

#[test]
fn small_stability_cases() {
    let g = ground(&parse_program("0 { p } 1.").unwrap(), 10).unwrap();
    assert!(is_answer_set(&g, &interp(&["p"])));
    let g = ground(&parse_program("p :- not p.").unwrap(), 10).unwrap();
    assert!(!is_answer_set(&g, &interp(&["p"])));
    assert!(answer_sets(&g, 0).unwrap().is_empty());
}

#[test]
fn empty_partial_interpretation_is_extended() {
    assert!(extends(&interp(&["a", "b"]), &PartialInterpretation::default()));
    assert!(extends(&Interpretation::new(), &PartialInterpretation::default()));
}

#[test]
fn solver_agrees_with_brute_force() {
    let mut rng = common::rng(2024);
    for _ in 0..200 {
        let (text, g) = common::random_ground_program(&mut rng, 10);
        let fast: BTreeSet<AnswerSet> = answer_sets(&g, 0).unwrap().into_iter().collect();
        assert_eq!(fast, common::brute_force_answer_sets(&g), "{text}");
    }
}

#[test]
fn non_tight_loops_need_support() {
    assert_eq!(solve("p :- q. q :- p."), BTreeSet::from([Interpretation::new()]));
    assert_eq!(
        solve("p :- q. q :- p. p :- not r. r :- not p."),
        BTreeSet::from([interp(&["p", "q"]), interp(&["r"])])
    );
}

const WS: &str = "
    :~ mode(L, walk), crime_rating(L, R), R > 3. [1@3, L, R]
    :~ mode(L, bus). [1@2, L]
    :~ mode(L, walk), distance(L, D). [D@1, L, D]
";

#[test]
fn walking_legs_sum_their_distances() {
    let i = interp(&[
        "mode(l1,walk)",
        "distance(l1,100)",
        "mode(l2,walk)",
        "distance(l2,50)",
        "crime_rating(l1,1)",
        "crime_rating(l2,1)",
    ]);
    let mut text = String::from(WS);
    for a in &i {
        text.push_str(&format!("{a}.\n"));
    }
    let g = ground(&parse_program(&text).unwrap(), 1000).unwrap();
    let expected = BTreeSet::from([
        WeakTuple {
            weight: 100,
            level: 1,
            terms: vec![Term::constant("l1"), Term::int(100)],
        },
        WeakTuple {
            weight: 50,
            level: 1,
            terms: vec![Term::constant("l2"), Term::int(50)],
        },
    ]);
    assert_eq!(weak_tuples(&g, &i), expected);
    assert_eq!(score_at_level(&g, &i, 1).unwrap(), 150);

    let bus = Preference::new(&parse_program(WS).unwrap());
    let table = bus.score_table(&interp(&["mode(l1,bus)"])).unwrap();
    assert_eq!(table.get(&2), Some(&1));
}

#[test]
fn coin_preferences() {
    let w = parse_program(":~ val(C, t). [1@1, C]").unwrap();
    let pref = Preference::new(&w);
    let hh = interp(&["val(1,h)", "val(2,h)"]);
    let ht = interp(&["val(1,h)", "val(2,t)"]);
    let tt = interp(&["val(1,t)", "val(2,t)"]);
    assert!(pref.dominates(&hh, &ht).unwrap());
    assert!(!pref.dominates(&tt, &ht).unwrap());

    let g = ground(&parse_program(&format!("{P} :~ val(C, t). [1@1, C]")).unwrap(), 1000).unwrap();
    let coins = |v: &[&str]| -> Interpretation {
        let mut i = interp(&["coin(1)", "coin(2)"]);
        i.extend(interp(v));
        i
    };
    assert!(dominates(&g, &coins(&["val(1,h)", "val(2,h)"]), &coins(&["val(1,h)", "val(2,t)"])).unwrap());
    assert!(!dominates(&g, &coins(&["val(1,t)", "val(2,t)"]), &coins(&["val(1,h)", "val(2,t)"])).unwrap());
}

fn arb_table() -> impl Strategy<Value = ScoreTable> {
    prop::collection::btree_map(1i64..4, -3i64..4, 0..4).prop_map(|mut t| {
        t.retain(|_, v| *v != 0);
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn dominance_is_a_strict_order(a in arb_table(), b in arb_table(), c in arb_table()) {
        prop_assert!(!table_dominates(&a, &a));
        prop_assert!(!(table_dominates(&a, &b) && table_dominates(&b, &a)));
        if table_dominates(&a, &b) && table_dominates(&b, &c) {
            prop_assert!(table_dominates(&a, &c));
        }
        prop_assert!(table_dominates(&a, &b) || table_dominates(&b, &a) || a == b);
    }
}
