//! Random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use asplearn_core::harness::to_text;
use asplearn_core::learn::{learn_batch, LearnMode, LearnOptions, Outcome};
use asplearn_core::meta::{coverage_direct, coverage_meta, find_relevant_direct, find_relevant_example};
use asplearn_core::syntax::{append_body, Choice, Head, Literal, WeakTail};
use asplearn_core::task::{all_solutions, is_solution, translate_loas, Cdpi, LearningTask, Mode, Relation};
use asplearn_core::{
    answer_sets, ground, is_answer_set, parse_program, AnswerSet, Atom, GroundProgram, Interpretation,
    PartialInterpretation, Program, Rule, Term,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<'a>(rng: &mut ChaCha8Rng, atoms: &'a [String]) -> &'a str {
    atoms.choose(rng).expect("non-empty atom list")
}

fn body(rng: &mut ChaCha8Rng, atoms: &[String], max: usize) -> Vec<String> {
    (0..rng.gen_range(0..=max))
        .map(|_| {
            let a = pick(rng, atoms);
            if rng.gen_bool(0.4) {
                format!("not {a}")
            } else {
                a.to_string()
            }
        })
        .collect()
}

fn with_body(head: String, body: &[String]) -> String {
    if body.is_empty() {
        format!("{head}.")
    } else {
        format!("{head} :- {}.", body.join(", "))
    }
}

/// One random propositional rule. `weak` allows weak constraints.
pub fn random_rule(rng: &mut ChaCha8Rng, atoms: &[String], weak: bool) -> String {
    let kinds = if weak { 5 } else { 4 };
    match rng.gen_range(0..kinds) {
        0 | 1 => with_body(pick(rng, atoms).to_string(), &body(rng, atoms, 3)),
        2 => {
            let mut elems: Vec<&str> = (0..rng.gen_range(1..=3)).map(|_| pick(rng, atoms)).collect();
            elems.sort_unstable();
            elems.dedup();
            let lower = rng.gen_range(0..=elems.len().min(1));
            let upper = rng.gen_range(lower.max(1)..=elems.len());
            with_body(format!("{lower} {{ {} }} {upper}", elems.join("; ")), &body(rng, atoms, 2))
        }
        3 => {
            let mut b = body(rng, atoms, 3);
            if b.is_empty() {
                b.push(pick(rng, atoms).to_string());
            }
            format!(":- {}.", b.join(", "))
        }
        _ => {
            let mut b = body(rng, atoms, 2);
            if b.is_empty() {
                b.push(pick(rng, atoms).to_string());
            }
            let w = rng.gen_range(-1..=3);
            let l = rng.gen_range(1..=2);
            let tag = ["x", "y"].choose(rng).unwrap();
            format!(":~ {}. [{w}@{l}, {tag}]", b.join(", "))
        }
    }
}

pub fn prop_atoms(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

pub fn random_program_text(rng: &mut ChaCha8Rng, atoms: &[String], rules: usize, weak: bool) -> String {
    (0..rules).map(|_| random_rule(rng, atoms, weak)).collect::<Vec<_>>().join("\n")
}

/// Random propositional ground program over at most `max_atoms` atoms.
pub fn random_ground_program(rng: &mut ChaCha8Rng, max_atoms: usize) -> (String, GroundProgram) {
    let n = rng.gen_range(1..=max_atoms);
    let atoms = prop_atoms(n);
    let rules = rng.gen_range(1..=n + 4);
    let text = random_program_text(rng, &atoms, rules, false);
    let g = ground(&parse_program(&text).expect("generated program parses"), 1000).expect("small grounding");
    (text, g)
}

/// All answer sets by testing every subset of the ground atoms.
pub fn brute_force_answer_sets(g: &GroundProgram) -> BTreeSet<AnswerSet> {
    let atoms: Vec<Atom> = (0..g.atom_count()).map(|i| g.atom(i as u32).clone()).collect();
    assert!(atoms.len() <= 20, "too many atoms for brute force");
    (0u32..1 << atoms.len())
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect::<Interpretation>()
        })
        .filter(|i| is_answer_set(g, i))
        .collect()
}

fn random_example_atoms(rng: &mut ChaCha8Rng, atoms: &[String]) -> PartialInterpretation {
    let mut inc = Vec::new();
    let mut exc = Vec::new();
    for a in atoms {
        match rng.gen_range(0..6) {
            0 => inc.push(a.parse::<Atom>().unwrap()),
            1 => exc.push(a.parse::<Atom>().unwrap()),
            _ => {}
        }
    }
    PartialInterpretation::new(inc, exc)
}

fn random_context(rng: &mut ChaCha8Rng, atoms: &[String]) -> Program {
    let n = rng.gen_range(0..=2);
    parse_program(&random_program_text(rng, atoms, n, false)).unwrap()
}

/// A micro task: at most 4 candidate rules, at most 5 program atoms (plus
/// at most 3 `ctx` atoms after translation), at most 3 examples.
pub fn random_micro_task(rng: &mut ChaCha8Rng) -> LearningTask {
    let atoms = prop_atoms(rng.gen_range(2..=5));
    let weak = rng.gen_bool(0.5);
    let n_bg = rng.gen_range(0..=2);
    let background = parse_program(&random_program_text(rng, &atoms, n_bg, false)).unwrap();
    let n_space = rng.gen_range(1..=4);
    let mut space: Vec<Rule> = Vec::new();
    while space.len() < n_space {
        let r: Rule = random_rule(rng, &atoms, weak).parse().unwrap();
        if !space.contains(&r) {
            space.push(r);
        }
    }
    let mut t = LearningTask::new(background, space);
    let total = rng.gen_range(1..=3);
    let n_pos = rng.gen_range(0..=total);
    let n_neg = if n_pos == 0 { total } else { rng.gen_range(0..=total - n_pos) };
    for i in 0..n_pos {
        let example = random_example_atoms(rng, &atoms);
        let context = random_context(rng, &atoms);
        t.add_positive(Cdpi::new(&format!("p{i}"), example, context));
    }
    for i in 0..n_neg {
        let example = random_example_atoms(rng, &atoms);
        let context = random_context(rng, &atoms);
        t.add_negative(Cdpi::new(&format!("n{i}"), example, context));
    }
    for _ in 0..total - n_pos - n_neg {
        let a = format!("p{}", rng.gen_range(0..n_pos));
        let b = format!("p{}", rng.gen_range(0..n_pos));
        let mode = if rng.gen_bool(0.5) { Mode::Brave } else { Mode::Cautious };
        let relation = if mode == Mode::Brave && rng.gen_bool(0.3) {
            Relation::Equal
        } else {
            Relation::Strict
        };
        t.add_ordering(&a, &b, relation, mode);
    }
    t.validate().expect("generated task is valid");
    t
}

/// Instantiates every rule with every substitution of its variables over
/// `universe`, keeping only instances whose comparisons hold.
pub fn naive_instantiation(p: &Program, universe: &[Term]) -> Program {
    let mut out = Program::default();
    for rule in &p.rules {
        let mut vars = BTreeSet::new();
        for a in rule.atoms() {
            a.collect_vars(&mut vars);
        }
        for lit in &rule.body {
            if let Literal::Cmp(l, _, r) = lit {
                l.collect_vars(&mut vars);
                r.collect_vars(&mut vars);
            }
        }
        if let Head::Weak(tail) = &rule.head {
            tail.weight.collect_vars(&mut vars);
            tail.level.collect_vars(&mut vars);
            tail.terms.iter().for_each(|t| t.collect_vars(&mut vars));
        }
        let vars: Vec<_> = vars.into_iter().collect();
        let mut idx = vec![0usize; vars.len()];
        loop {
            let sub: BTreeMap<_, _> = vars.iter().cloned().zip(idx.iter().map(|&i| universe[i].clone())).collect();
            let r = subst_rule(rule, &sub);
            let cmp_ok = r.body.iter().all(|l| match l {
                Literal::Cmp(a, op, b) => op.holds(a, b),
                _ => true,
            });
            if cmp_ok {
                let mut r = r;
                r.body.retain(|l| !matches!(l, Literal::Cmp(..)));
                out.rules.push(r);
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < universe.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    out
}

type Sub = BTreeMap<asplearn_core::syntax::Symbol, Term>;

fn subst_term(t: &Term, s: &Sub) -> Term {
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(|a| subst_term(a, s)).collect()),
        _ => t.clone(),
    }
}

fn subst_atom(a: &Atom, s: &Sub) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| subst_term(t, s)).collect(),
    }
}

fn subst_rule(r: &Rule, s: &Sub) -> Rule {
    let head = match &r.head {
        Head::Atom(a) => Head::Atom(subst_atom(a, s)),
        Head::Constraint => Head::Constraint,
        Head::Choice(c) => Head::Choice(Choice {
            lower: c.lower,
            upper: c.upper,
            elements: c.elements.iter().map(|a| subst_atom(a, s)).collect(),
        }),
        Head::Weak(w) => Head::Weak(WeakTail {
            weight: subst_term(&w.weight, s),
            level: subst_term(&w.level, s),
            terms: w.terms.iter().map(|t| subst_term(t, s)).collect(),
        }),
    };
    let body = r
        .body
        .iter()
        .map(|l| match l {
            Literal::Pos(a) => Literal::Pos(subst_atom(a, s)),
            Literal::Neg(a) => Literal::Neg(subst_atom(a, s)),
            Literal::Cmp(x, op, y) => Literal::Cmp(subst_term(x, s), *op, subst_term(y, s)),
        })
        .collect();
    Rule { head, body }
}

pub const BUDGET: usize = 10_000;

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// Solutions of a task and of its translation, by exhaustive enumeration.
/// Returns a description of the first disagreement.
pub fn translation_discrepancy(t: &LearningTask) -> Option<String> {
    let translated = translate_loas(t).expect("micro tasks translate");
    let direct = all_solutions(t, BUDGET).expect("direct enumeration");
    let via = all_solutions(&translated, BUDGET).expect("translated enumeration");
    (direct != via).then(|| format!("task:\n{}\ncontext solutions {direct:?}, translated {via:?}", to_text(t)))
}

/// Per-example verdicts of the meta program against direct checks, for
/// every subset of the hypothesis space.
pub fn meta_discrepancy(t: &LearningTask) -> Option<String> {
    for indices in subsets(t.hypothesis_space.len()) {
        let h: Program = indices.iter().map(|&i| t.hypothesis_space[i].clone()).collect();
        let meta = coverage_meta(t, &h, BUDGET).expect("meta coverage");
        let direct = coverage_direct(t, &h, BUDGET).expect("direct coverage");
        if meta != direct {
            return Some(format!(
                "task:\n{}\nH = {indices:?}\nmeta {:?}\ndirect {:?}",
                to_text(t),
                meta.verdicts,
                direct.verdicts
            ));
        }
        let a = find_relevant_example(t, &h, BUDGET).unwrap();
        let b = find_relevant_direct(t, &h, BUDGET).unwrap();
        if a != b {
            return Some(format!("task:\n{}\nH = {indices:?}: relevant {a:?} vs {b:?}", to_text(t)));
        }
    }
    None
}

/// Random program and contexts over at most 10 atoms in total, checked
/// against the combination property of guarded contexts.
pub fn splitting_discrepancy(rng: &mut ChaCha8Rng) -> Option<String> {
    let n = rng.gen_range(1..=3);
    let atoms = prop_atoms(rng.gen_range(1..=10 - n));
    let p_rules = rng.gen_range(0..=4);
    let p = parse_program(&random_program_text(rng, &atoms, p_rules, false)).unwrap();
    let contexts: Vec<Program> = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=3);
            parse_program(&random_program_text(rng, &atoms, k, false)).unwrap()
        })
        .collect();
    let guards: Vec<Atom> = (0..n).map(|i| Atom::prop(&format!("g{i}"))).collect();

    let mut combined = p.clone();
    combined.rules.push(Rule::choice(1, Some(1), guards.clone(), Vec::new()));
    for (c, g) in contexts.iter().zip(&guards) {
        combined.extend(&append_body(c, g));
    }
    let left: BTreeSet<AnswerSet> = answer_sets(&ground(&combined, BUDGET).unwrap(), 0).unwrap().into_iter().collect();

    let mut right = BTreeSet::new();
    for (c, g) in contexts.iter().zip(&guards) {
        for mut a in answer_sets(&ground(&p.union(c), BUDGET).unwrap(), 0).unwrap() {
            a.insert(g.clone());
            right.insert(a);
        }
    }
    (left != right).then(|| format!("P:\n{p}contexts: {contexts:?}\nleft {left:?}\nright {right:?}"))
}

/// Iterative against batch learning on one task.
pub fn learner_discrepancy(t: &LearningTask) -> Option<String> {
    let opts = LearnOptions {
        atom_budget: BUDGET,
        ..Default::default()
    };
    let batch = learn_batch(t, &opts).unwrap();
    for mode in [LearnMode::Iterative, LearnMode::IterativePretranslated] {
        let it = mode.run(t, &opts).unwrap();
        let describe = || format!("{} on task:\n{}\nbatch {:?}, got {:?}", mode.name(), to_text(t), batch.outcome, it.outcome);
        match (&batch.outcome, &it.outcome) {
            (Outcome::Unsatisfiable, Outcome::Unsatisfiable) => {}
            (Outcome::Hypothesis(hb), Outcome::Hypothesis(hi)) => {
                if hb.length != hi.length {
                    return Some(describe());
                }
                if it.stats.iterations > t.example_count() {
                    return Some(format!("{} iterations > {} examples\n{}", it.stats.iterations, t.example_count(), describe()));
                }
                let h = hi.program(&t.hypothesis_space);
                if !is_solution(t, &h, BUDGET).unwrap() {
                    return Some(format!("result does not cover every example\n{}", describe()));
                }
            }
            _ => return Some(describe()),
        }
    }
    None
}
