mod common;

use std::collections::BTreeSet;

use asplearn_core::syntax::reify;
use asplearn_core::{answer_sets, ground, parse_program, AnswerSet, Atom, Program, Term};
use proptest::prelude::*;

fn answer_set_set(p: &Program) -> BTreeSet<AnswerSet> {
    answer_sets(&ground(p, 10_000).unwrap(), 0).unwrap().into_iter().collect()
}

#[test]
fn coin_range_fact() {
    let p = parse_program("coin(1..2).").unwrap();
    assert_eq!(p.rules.len(), 1);
    let sets = answer_set_set(&p);
    let expected: AnswerSet = ["coin(1)", "coin(2)"].iter().map(|a| a.parse().unwrap()).collect();
    assert_eq!(sets, BTreeSet::from([expected]));
}

#[test]
fn reify_drops_weak_constraints() {
    let p = parse_program(":~ p. [1@1]").unwrap();
    assert!(reify(&p, "as1").unwrap().is_empty());
}

#[test]
fn reify_wraps_every_atom() {
    let p = parse_program("p(X) :- q(X), not r(X). q(1). 1 { s; t } 1. :- s, t.").unwrap();
    let r = reify(&p, "as1").unwrap();
    assert_eq!(r.rules.len(), p.rules.len());
    for rule in &r.rules {
        assert!(rule.atoms().all(|a| &*a.predicate == "as1"));
    }
}

#[test]
fn reify_rejects_clashing_wrapper() {
    assert!(reify(&parse_program("as1(p).").unwrap(), "as1").is_err());
}

fn unwrap_answer_set(a: &AnswerSet) -> AnswerSet {
    a.iter()
        .map(|w| match &w.args[0] {
            t @ (Term::Sym(_) | Term::Func(..)) => t.to_atom().expect("wrapped term is an atom"),
            other => panic!("unexpected wrapped argument {other}"),
        })
        .collect()
}

#[test]
fn reify_is_an_isomorphism_on_answer_sets() {
    let mut rng = common::rng(11);
    for _ in 0..100 {
        let (text, _) = common::random_ground_program(&mut rng, 6);
        let p = parse_program(&text).unwrap();
        let plain = answer_set_set(&p);
        let wrapped: BTreeSet<AnswerSet> = answer_set_set(&reify(&p, "as1").unwrap())
            .iter()
            .map(unwrap_answer_set)
            .collect();
        assert_eq!(plain, wrapped, "{text}");
    }
}

#[test]
fn grounder_matches_naive_instantiation() {
    let programs = [
        "node(1..3). edge(1,2). edge(2,3). edge(3,1).
         0 { in(X,Y) } 1 :- edge(X,Y).
         reach(Y) :- in(1,Y).
         reach(Y) :- reach(X), in(X,Y).
         :- node(X), not reach(X).
         :- in(X,Y), in(X,Z), Y != Z.",
        "n(1..4). p(X) :- n(X), not q(X). q(X) :- n(X), not p(X). :- p(X), p(Y), X < Y.",
        "d(1..3). 1 { c(X, r); c(X, g) } 1 :- d(X). :- c(X, C), c(Y, C), X != Y, X < 3.",
        "v(1). v(2). w(X) :- v(X), X > 1. z :- not w(1).",
    ];
    for text in programs {
        let p = parse_program(text).unwrap();
        let g = ground(&p, 10_000).unwrap();
        let mut universe: BTreeSet<Term> = BTreeSet::new();
        for i in 0..g.atom_count() {
            universe.extend(g.atom(i as u32).args.iter().cloned());
        }
        let universe: Vec<Term> = universe.into_iter().collect();
        let naive = common::naive_instantiation(&p, &universe);
        assert_eq!(answer_set_set(&p), answer_set_set(&naive), "{text}");
    }
}

#[test]
fn budget_is_enforced() {
    let p = parse_program("n(1..50). p(X, Y) :- n(X), n(Y).").unwrap();
    assert!(matches!(ground(&p, 100), Err(asplearn_core::Error::AtomBudgetExceeded { budget: 100 })));
}

fn arb_atom() -> impl Strategy<Value = String> {
    let name = prop::sample::select(vec!["p", "q", "edge", "val"]);
    let term = prop_oneof![
        (-5i64..20).prop_map(|i| i.to_string()),
        prop::sample::select(vec!["a", "b", "h", "t"]).prop_map(String::from),
        prop::sample::select(vec!["X", "Y"]).prop_map(String::from),
    ];
    (name, prop::collection::vec(term, 0..3)).prop_map(|(n, args)| {
        if args.is_empty() {
            n.to_string()
        } else {
            format!("{n}({})", args.join(", "))
        }
    })
}

fn arb_body() -> impl Strategy<Value = Vec<String>> {
    let lit = (arb_atom(), any::<bool>()).prop_map(|(a, neg)| if neg { format!("not {a}") } else { a });
    prop::collection::vec(lit, 0..3)
}

fn arb_rule() -> impl Strategy<Value = String> {
    prop_oneof![
        (arb_atom(), arb_body()).prop_map(|(h, b)| if b.is_empty() {
            format!("{h}.")
        } else {
            format!("{h} :- {}.", b.join(", "))
        }),
        (prop::collection::vec(arb_atom(), 1..3), 0i64..2, arb_body())
            .prop_map(|(e, l, b)| {
                let head = format!("{l} {{ {} }} 2", e.join("; "));
                if b.is_empty() {
                    format!("{head}.")
                } else {
                    format!("{head} :- {}.", b.join(", "))
                }
            }),
        (arb_atom(), arb_body()).prop_map(|(a, b)| {
            let mut all = vec![a];
            all.extend(b);
            format!(":- {}.", all.join(", "))
        }),
        (arb_atom(), 1i64..5, 1i64..4).prop_map(|(a, w, l)| format!(":~ {a}. [{w}@{l}, k]")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(rules in prop::collection::vec(arb_rule(), 1..6)) {
        for text in rules {
            let mut parser = asplearn_core::syntax::Parser::new(&text).unwrap();
            let rule = parser.parse_rule().unwrap();
            let printed = rule.to_string();
            let mut again = asplearn_core::syntax::Parser::new(&printed).unwrap();
            prop_assert_eq!(again.parse_rule().unwrap(), rule);
        }
    }

    #[test]
    fn atom_display_round_trips(a in arb_atom()) {
        let atom: Atom = a.parse().unwrap();
        prop_assert_eq!(atom.to_string().parse::<Atom>().unwrap(), atom);
    }
}
