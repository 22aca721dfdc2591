//! Coverage through a single meta program.
//!
//! Two reified copies of `B ∪ H` (`as1`, `as2`) stand for two answer sets.
//! Each example is guarded by a `test(id)` atom, exactly one of which is
//! chosen, and `test_on(id, asK)` switches on the example's context and
//! its coverage rules in copy `asK`. Weak constraints become `w/4` atoms
//! whose per-level sums are compared natively on each answer set, which
//! is where the `dominated` atom would otherwise be derived with `#sum`.
//!
//! The `as2` copy of `B ∪ H` is additionally guarded by `active(as2)`,
//! which only ordering tests switch on.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::ground::{ground, AtomId, GroundProgram};
use crate::syntax::transform::{wrap, wrap_body};
use crate::syntax::{append_body, reify, Atom, Head, Literal, Program, Rule, Term};
use crate::task::{covers_example, id_term, Cdpi, ExampleRef, LearningTask, Relation};

const AS1: &str = "as1";
const AS2: &str = "as2";

fn c(name: &str) -> Term {
    Term::constant(name)
}

fn test_atom(id: &Term) -> Atom {
    Atom::new("test", vec![id.clone()])
}

fn test_on(id: &Term, copy: &str) -> Atom {
    Atom::new("test_on", vec![id.clone(), c(copy)])
}

fn active_as2() -> Atom {
    Atom::new("active", vec![c(AS2)])
}

fn parse_ground_term(id: &str) -> Result<Term> {
    let invalid = || Error::InvalidExampleId(id.to_string());
    let mut parser = crate::syntax::Parser::new(id).map_err(|_| invalid())?;
    let term = parser.parse_term().map_err(|_| invalid())?;
    if !parser.at_eof() || !term.is_ground() {
        return Err(invalid());
    }
    Ok(term)
}

/// `w(W, L, terms(T..), copy) :- body` for each weak constraint.
fn weak_rules(p: &Program, copy: &str) -> Vec<Rule> {
    p.rules
        .iter()
        .filter_map(|r| match &r.head {
            Head::Weak(tail) => Some(Rule::normal(
                Atom::new(
                    "w",
                    vec![
                        tail.weight.clone(),
                        tail.level.clone(),
                        Term::func("terms", tail.terms.clone()),
                        c(copy),
                    ],
                ),
                wrap_body(&r.body, copy),
            )),
            _ => None,
        })
        .collect()
}

fn syntactic_levels(p: &Program) -> BTreeSet<i64> {
    p.rules
        .iter()
        .filter_map(|r| match &r.head {
            Head::Weak(tail) => tail.level.as_int(),
            _ => None,
        })
        .collect()
}

/// Body checking that copy `copy` extends the example.
fn extends_body(ex: &Cdpi, id: &Term, copy: &str) -> Vec<Literal> {
    let mut body = vec![Literal::Pos(test_on(id, copy))];
    body.extend(ex.example.inc.iter().map(|a| Literal::Pos(wrap(a, copy))));
    body.extend(ex.example.exc.iter().map(|a| Literal::Neg(wrap(a, copy))));
    body
}

fn context_in(ex: &Cdpi, id: &Term, copy: &str) -> Result<Program> {
    Ok(append_body(&reify(&ex.context, copy)?, &test_on(id, copy)))
}

/// Ground `w/4` atoms of one copy, with their weight and level.
#[derive(Clone, Debug)]
struct WeakAtom {
    id: AtomId,
    weight: i64,
    level: i64,
    first: bool,
}

pub struct MetaProgram {
    pub program: Program,
    pub ground: GroundProgram,
    tests: BTreeMap<ExampleRef, Option<AtomId>>,
    orderings: BTreeMap<ExampleRef, Relation>,
    weak_atoms: Vec<WeakAtom>,
    levels: BTreeSet<i64>,
    solver: crate::solve::Solver,
}

impl MetaProgram {
    pub fn atom_count(&self) -> usize {
        self.ground.atom_count()
    }

    pub fn solver_calls(&self) -> usize {
        self.solver.calls()
    }

    /// Whether some answer set containing the example's test atom survives
    /// the ordering filters.
    fn test_holds(&mut self, r: ExampleRef) -> Result<bool> {
        let Some(Some(atom)) = self.tests.get(&r).copied() else {
            return Ok(false);
        };
        let relation = self.orderings.get(&r).copied();
        let cautious = matches!(r, ExampleRef::Cautious(_));
        let weak_atoms = &self.weak_atoms;
        let levels = &self.levels;
        let mut found = false;
        let mut err = None;
        self.solver.solve(&[(atom, true)], |truth| {
            let keep = match relation {
                None => Ok(true),
                Some(rel) => native_dominance(weak_atoms, levels, truth).map(|(fwd, back)| match rel {
                    _ if cautious => !fwd,
                    Relation::Strict => fwd,
                    Relation::Equal => !fwd && !back,
                }),
            };
            match keep {
                Ok(true) => {
                    found = true;
                    ControlFlow::Break(())
                }
                Ok(false) => ControlFlow::Continue(()),
                Err(e) => {
                    err = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(found),
        }
    }

    /// Coverage verdict for one example.
    pub fn covered(&mut self, r: ExampleRef) -> Result<bool> {
        let holds = self.test_holds(r)?;
        Ok(match r {
            ExampleRef::Positive(_) | ExampleRef::Brave(_) => holds,
            ExampleRef::Negative(_) | ExampleRef::Cautious(_) => !holds,
        })
    }
}

/// `(as1 dominates as2, as2 dominates as1)`, computed the way the
/// `dom_lv`/`non_dom_lv`/`non_bef`/`dominated` rules would.
fn native_dominance(weak_atoms: &[WeakAtom], levels: &BTreeSet<i64>, truth: &[bool]) -> Result<(bool, bool)> {
    let mut sums: BTreeMap<i64, (i64, i64)> = levels.iter().map(|&l| (l, (0, 0))).collect();
    for w in weak_atoms.iter().filter(|w| truth[w.id as usize]) {
        let slot = sums.entry(w.level).or_insert((0, 0));
        let target = if w.first { &mut slot.0 } else { &mut slot.1 };
        *target = target.checked_add(w.weight).ok_or(Error::Overflow("summing weak constraint weights"))?;
    }
    let dominated = |better: &dyn Fn(&(i64, i64)) -> bool, worse: &dyn Fn(&(i64, i64)) -> bool| {
        sums.iter().any(|(level, s)| {
            better(s) && !sums.range(level + 1..).any(|(_, s2)| worse(s2))
        })
    };
    let as1_better = |s: &(i64, i64)| s.0 < s.1;
    let as2_better = |s: &(i64, i64)| s.1 < s.0;
    Ok((dominated(&as1_better, &as2_better), dominated(&as2_better, &as1_better)))
}

/// Assembles and grounds the meta program for `t` and hypothesis `h`.
pub fn build_meta(t: &LearningTask, h: &Program, budget: usize) -> Result<MetaProgram> {
    if !t.has_examples() {
        return Err(Error::NoExamples);
    }
    let bh = t.background.union(h);
    let mut program = reify(&bh, AS1)?;
    program.extend(&append_body(&reify(&bh, AS2)?, &active_as2()));
    program.rules.extend(weak_rules(&bh, AS1));
    program.rules.extend(weak_rules(&bh, AS2));
    let levels = syntactic_levels(&bh);
    for &l in &levels {
        program.rules.push(Rule::fact(Atom::new("lv", vec![Term::int(l)])));
    }

    let mut test_terms: Vec<(ExampleRef, Term)> = Vec::new();
    let cov = |copy: &str| Atom::new("cov", vec![c(copy)]);
    for (i, ex) in t.positives.iter().enumerate() {
        let id = id_term(&ex.id)?;
        for copy in [AS1, AS2] {
            program.rules.push(Rule::normal(cov(copy), extends_body(ex, &id, copy)));
        }
        for copy in [AS1, AS2] {
            program.rules.push(Rule::constraint(vec![
                Literal::Neg(cov(copy)),
                Literal::Pos(test_on(&id, copy)),
            ]));
        }
        for copy in [AS1, AS2] {
            program.extend(&context_in(ex, &id, copy)?);
        }
        test_terms.push((ExampleRef::Positive(i), id));
    }
    let violated = Atom::prop("violated");
    for (i, ex) in t.negatives.iter().enumerate() {
        let id = id_term(&ex.id)?;
        program.rules.push(Rule::normal(violated.clone(), extends_body(ex, &id, AS1)));
        program.extend(&context_in(ex, &id, AS1)?);
        program.rules.push(Rule::constraint(vec![
            Literal::Neg(violated.clone()),
            Literal::Pos(test_on(&id, AS1)),
        ]));
        test_terms.push((ExampleRef::Negative(i), id));
    }

    let mut orderings = BTreeMap::new();
    let mut ordering_rules = Vec::new();
    let all_orderings = t
        .brave_orderings
        .iter()
        .enumerate()
        .map(|(i, o)| (ExampleRef::Brave(i), o))
        .chain(t.cautious_orderings.iter().enumerate().map(|(i, o)| (ExampleRef::Cautious(i), o)));
    for (r, o) in all_orderings {
        let id = parse_ground_term(&o.id)?;
        let guard = vec![Literal::Pos(test_atom(&id))];
        let first = id_term(&o.first)?;
        let second = id_term(&o.second)?;
        ordering_rules.push(Rule::normal(test_on(&first, AS1), guard.clone()));
        ordering_rules.push(Rule::normal(test_on(&second, AS2), guard.clone()));
        ordering_rules.push(Rule::normal(active_as2(), guard));
        orderings.insert(r, o.relation);
        test_terms.push((r, id));
    }

    program.rules.push(Rule::choice(
        1,
        Some(1),
        test_terms.iter().map(|(_, id)| test_atom(id)).collect(),
        Vec::new(),
    ));
    for (r, id) in &test_terms {
        if matches!(r, ExampleRef::Positive(_) | ExampleRef::Negative(_)) {
            program
                .rules
                .push(Rule::normal(test_on(id, AS1), vec![Literal::Pos(test_atom(id))]));
        }
    }
    program.rules.extend(ordering_rules);

    let g = ground(&program, budget)?;
    let tests = test_terms
        .iter()
        .map(|(r, id)| (*r, g.atom_id(&test_atom(id))))
        .collect();
    let mut all_levels = levels;
    let mut weak_atoms = Vec::new();
    for (i, atom) in g.atoms.iter().enumerate() {
        if &*atom.predicate != "w" || atom.arity() != 4 {
            continue;
        }
        let (Some(weight), Some(level)) = (atom.args[0].as_int(), atom.args[1].as_int()) else {
            return Err(Error::NonIntegerWeight {
                what: "weight or level",
                term: atom.to_string(),
            });
        };
        all_levels.insert(level);
        weak_atoms.push(WeakAtom {
            id: i as AtomId,
            weight,
            level,
            first: atom.args[3] == c(AS1),
        });
    }
    let solver = crate::solve::Solver::new(&g);
    Ok(MetaProgram {
        program,
        ground: g,
        tests,
        orderings,
        weak_atoms,
        levels: all_levels,
        solver,
    })
}

/// Per-example verdicts, in task order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverageReport {
    pub verdicts: Vec<(ExampleRef, bool)>,
}

impl CoverageReport {
    pub fn first_uncovered(&self) -> Option<ExampleRef> {
        self.verdicts.iter().find(|(_, ok)| !ok).map(|(r, _)| *r)
    }

    pub fn uncovered(&self) -> Vec<ExampleRef> {
        self.verdicts.iter().filter(|(_, ok)| !ok).map(|(r, _)| *r).collect()
    }

    pub fn all_covered(&self) -> bool {
        self.verdicts.iter().all(|(_, ok)| *ok)
    }
}

/// Picks the next relevant example, querying verdicts lazily.
pub trait SelectionStrategy: Send + Sync {
    fn select(
        &self,
        refs: &[ExampleRef],
        covered: &mut dyn FnMut(ExampleRef) -> Result<bool>,
    ) -> Result<Option<ExampleRef>>;
}

/// The first uncovered example in task order.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstUncovered;

impl SelectionStrategy for FirstUncovered {
    fn select(
        &self,
        refs: &[ExampleRef],
        covered: &mut dyn FnMut(ExampleRef) -> Result<bool>,
    ) -> Result<Option<ExampleRef>> {
        for &r in refs {
            if !covered(r)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }
}

/// The last uncovered example in task order.
#[derive(Clone, Copy, Debug, Default)]
pub struct LastUncovered;

impl SelectionStrategy for LastUncovered {
    fn select(
        &self,
        refs: &[ExampleRef],
        covered: &mut dyn FnMut(ExampleRef) -> Result<bool>,
    ) -> Result<Option<ExampleRef>> {
        for &r in refs.iter().rev() {
            if !covered(r)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }
}

pub fn coverage_meta(t: &LearningTask, h: &Program, budget: usize) -> Result<CoverageReport> {
    if !t.has_examples() {
        return Ok(CoverageReport::default());
    }
    let mut meta = build_meta(t, h, budget)?;
    let verdicts = t
        .example_refs()
        .into_iter()
        .map(|r| Ok((r, meta.covered(r)?)))
        .collect::<Result<_>>()?;
    Ok(CoverageReport { verdicts })
}

pub fn coverage_direct(t: &LearningTask, h: &Program, budget: usize) -> Result<CoverageReport> {
    let verdicts = t
        .example_refs()
        .into_iter()
        .map(|r| Ok((r, covers_example(t, h, r, budget)?)))
        .collect::<Result<_>>()?;
    Ok(CoverageReport { verdicts })
}

/// Outcome of one relevant-example search, with its cost.
#[derive(Clone, Debug, Default)]
pub struct RelevantSearch {
    pub example: Option<ExampleRef>,
    pub ground_atoms: usize,
    pub solver_calls: usize,
}

pub fn find_relevant_with(
    t: &LearningTask,
    h: &Program,
    budget: usize,
    strategy: &dyn SelectionStrategy,
) -> Result<RelevantSearch> {
    if !t.has_examples() {
        return Ok(RelevantSearch::default());
    }
    let mut meta = build_meta(t, h, budget)?;
    let example = strategy.select(&t.example_refs(), &mut |r| meta.covered(r))?;
    Ok(RelevantSearch {
        example,
        ground_atoms: meta.atom_count(),
        solver_calls: meta.solver_calls(),
    })
}

/// The first example (positives, negatives, brave, cautious) not covered by
/// `B ∪ h`, decided with the meta program.
pub fn find_relevant_example(t: &LearningTask, h: &Program, budget: usize) -> Result<Option<ExampleRef>> {
    Ok(find_relevant_with(t, h, budget, &FirstUncovered)?.example)
}

/// Same contract as [`find_relevant_example`], decided example by example.
pub fn find_relevant_direct(t: &LearningTask, h: &Program, budget: usize) -> Result<Option<ExampleRef>> {
    FirstUncovered.select(&t.example_refs(), &mut |r| covers_example(t, h, r, budget))
}

/// Evaluates the dominance layer on two fixed interpretations: the `w/4`
/// rules of `p` over `as1(I1)` and `as2(I2)`, then the native level sums.
pub fn dominated_by_meta(
    p: &Program,
    i1: &crate::solve::Interpretation,
    i2: &crate::solve::Interpretation,
    budget: usize,
) -> Result<bool> {
    let mut program: Program = weak_rules(p, AS1).into_iter().chain(weak_rules(p, AS2)).collect();
    program.rules.extend(i1.iter().map(|a| Rule::fact(wrap(a, AS1))));
    program.rules.extend(i2.iter().map(|a| Rule::fact(wrap(a, AS2))));
    let mut levels = syntactic_levels(p);
    for &l in &levels {
        program.rules.push(Rule::fact(Atom::new("lv", vec![Term::int(l)])));
    }
    let g = ground(&program, budget)?;
    let mut weak_atoms = Vec::new();
    for (i, atom) in g.atoms.iter().enumerate() {
        if &*atom.predicate == "w" && atom.arity() == 4 {
            let (Some(weight), Some(level)) = (atom.args[0].as_int(), atom.args[1].as_int()) else {
                return Err(Error::NonIntegerWeight {
                    what: "weight or level",
                    term: atom.to_string(),
                });
            };
            levels.insert(level);
            weak_atoms.push(WeakAtom {
                id: i as AtomId,
                weight,
                level,
                first: atom.args[3] == c(AS1),
            });
        }
    }
    let models = crate::solve::Solver::new(&g).models(&[], 2)?;
    let [model] = models.as_slice() else {
        unreachable!("a stratified program has exactly one answer set");
    };
    let mut truth = vec![false; g.atom_count()];
    for &a in model {
        truth[a as usize] = true;
    }
    Ok(native_dominance(&weak_atoms, &levels, &truth)?.0)
}
