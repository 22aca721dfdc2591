//! Learning tasks with context-dependent examples, direct coverage checks,
//! and the translation into a context-free task.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::ground::ground;
use crate::preference::{table_dominates, table_of, weak_tuples_ids, ScoreTable};
use crate::solve::{assumptions_for, PartialInterpretation, Solver};
use crate::syntax::{append_body, Atom, Parser, Program, Rule, Term};

pub const CTX: &str = "ctx";

/// A context-dependent partial interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cdpi {
    pub id: String,
    pub example: PartialInterpretation,
    pub context: Program,
}

impl Cdpi {
    pub fn new(id: &str, example: PartialInterpretation, context: Program) -> Self {
        Cdpi {
            id: id.to_string(),
            example,
            context,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Strict,
    Equal,
}

/// A context-dependent ordering example over two positive examples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cdoe {
    pub id: String,
    pub first: String,
    pub second: String,
    pub relation: Relation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Brave,
    Cautious,
}

/// Position of an example inside a task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleRef {
    Positive(usize),
    Negative(usize),
    Brave(usize),
    Cautious(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LearningTask {
    pub background: Program,
    pub hypothesis_space: Vec<Rule>,
    pub positives: Vec<Cdpi>,
    pub negatives: Vec<Cdpi>,
    pub brave_orderings: Vec<Cdoe>,
    pub cautious_orderings: Vec<Cdoe>,
}

/// A subset of the hypothesis space, by index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    pub indices: Vec<usize>,
    pub length: usize,
}

impl Hypothesis {
    pub fn new(mut indices: Vec<usize>, space: &[Rule]) -> Self {
        indices.sort_unstable();
        indices.dedup();
        let length = indices.iter().map(|&i| space[i].literal_count()).sum();
        Hypothesis { indices, length }
    }

    pub fn empty() -> Self {
        Hypothesis::default()
    }

    pub fn program(&self, space: &[Rule]) -> Program {
        self.indices.iter().map(|&i| space[i].clone()).collect()
    }
}

/// Parses an example id as a constant or integer term.
pub fn id_term(id: &str) -> Result<Term> {
    let invalid = || Error::InvalidExampleId(id.to_string());
    let mut parser = Parser::new(id).map_err(|_| invalid())?;
    let term = parser.parse_term().map_err(|_| invalid())?;
    if !parser.at_eof() {
        return Err(invalid());
    }
    match term {
        Term::Sym(_) | Term::Int(_) => Ok(term),
        _ => Err(invalid()),
    }
}

fn ordering_id_term(id: &str) -> Result<Term> {
    let invalid = || Error::InvalidExampleId(id.to_string());
    let mut parser = Parser::new(id).map_err(|_| invalid())?;
    let term = parser.parse_term().map_err(|_| invalid())?;
    if !parser.at_eof() || !term.is_ground() {
        return Err(invalid());
    }
    Ok(term)
}

impl LearningTask {
    pub fn new(background: Program, hypothesis_space: Vec<Rule>) -> Self {
        LearningTask {
            background,
            hypothesis_space,
            ..Default::default()
        }
    }

    pub fn add_positive(&mut self, ex: Cdpi) {
        self.positives.push(ex);
    }

    pub fn add_negative(&mut self, ex: Cdpi) {
        self.negatives.push(ex);
    }

    /// Adds an ordering with a generated id: `ord(b,K)` or `ord(c,K)`.
    pub fn add_ordering(&mut self, first: &str, second: &str, relation: Relation, mode: Mode) {
        let (list, tag) = match mode {
            Mode::Brave => (&mut self.brave_orderings, "b"),
            Mode::Cautious => (&mut self.cautious_orderings, "c"),
        };
        let id = format!("ord({tag},{})", list.len() + 1);
        list.push(Cdoe {
            id,
            first: first.to_string(),
            second: second.to_string(),
            relation,
        });
    }

    pub fn example_count(&self) -> usize {
        self.positives.len() + self.negatives.len() + self.brave_orderings.len() + self.cautious_orderings.len()
    }

    pub fn has_examples(&self) -> bool {
        self.example_count() > 0
    }

    pub fn positive(&self, id: &str) -> Option<&Cdpi> {
        self.positives.iter().find(|e| e.id == id)
    }

    pub fn positive_index(&self, id: &str) -> Option<usize> {
        self.positives.iter().position(|e| e.id == id)
    }

    pub fn example_id(&self, r: ExampleRef) -> &str {
        match r {
            ExampleRef::Positive(i) => &self.positives[i].id,
            ExampleRef::Negative(i) => &self.negatives[i].id,
            ExampleRef::Brave(i) => &self.brave_orderings[i].id,
            ExampleRef::Cautious(i) => &self.cautious_orderings[i].id,
        }
    }

    /// Every example reference in the fixed order positives, negatives,
    /// brave orderings, cautious orderings.
    pub fn example_refs(&self) -> Vec<ExampleRef> {
        (0..self.positives.len())
            .map(ExampleRef::Positive)
            .chain((0..self.negatives.len()).map(ExampleRef::Negative))
            .chain((0..self.brave_orderings.len()).map(ExampleRef::Brave))
            .chain((0..self.cautious_orderings.len()).map(ExampleRef::Cautious))
            .collect()
    }

    pub fn hypothesis_space_length(&self) -> usize {
        self.hypothesis_space.iter().map(Rule::literal_count).sum()
    }

    /// Locates each rule of `h` in the hypothesis space.
    pub fn hypothesis_of(&self, h: &Program) -> Result<Hypothesis> {
        let indices = h
            .rules
            .iter()
            .map(|r| {
                self.hypothesis_space
                    .iter()
                    .position(|s| s == r)
                    .ok_or_else(|| Error::NotInHypothesisSpace(r.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Hypothesis::new(indices, &self.hypothesis_space))
    }

    /// Checks the structural invariants of a task.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for ex in self.positives.iter().chain(&self.negatives) {
            id_term(&ex.id)?;
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::DuplicateExampleId(ex.id.clone()));
            }
            if ex.context.has_weak_constraints() {
                return Err(Error::WeakConstraintInContext(ex.id.clone()));
            }
        }
        for o in &self.brave_orderings {
            self.validate_ordering(o, &mut seen)?;
        }
        for o in &self.cautious_orderings {
            if o.relation == Relation::Equal {
                return Err(Error::CautiousEquality);
            }
            self.validate_ordering(o, &mut seen)?;
        }
        Ok(())
    }

    fn validate_ordering<'a>(&self, o: &'a Cdoe, seen: &mut HashSet<&'a str>) -> Result<()> {
        ordering_id_term(&o.id)?;
        if !seen.insert(o.id.as_str()) {
            return Err(Error::DuplicateExampleId(o.id.clone()));
        }
        for end in [&o.first, &o.second] {
            if self.positive(end).is_none() {
                return Err(Error::OrderingOverNonPositive(end.clone()));
            }
        }
        Ok(())
    }

    pub fn has_contexts(&self) -> bool {
        self.positives.iter().chain(&self.negatives).any(|e| !e.context.is_empty())
    }

    /// Every atom mentioned anywhere in the task.
    fn uses_predicate(&self, name: &str) -> bool {
        let in_examples = self.positives.iter().chain(&self.negatives).any(|e| {
            e.context.uses_predicate(name)
                || e.example.inc.iter().chain(&e.example.exc).any(|a| &*a.predicate == name)
        });
        in_examples
            || self.background.uses_predicate(name)
            || self
                .hypothesis_space
                .iter()
                .flat_map(Rule::atoms)
                .any(|a| &*a.predicate == name)
    }

    /// The sub-task keeping only the listed examples (in task order).
    pub fn restrict(&self, keep: &BTreeSet<ExampleRef>) -> LearningTask {
        let pick = |list: &[Cdpi], f: fn(usize) -> ExampleRef| -> Vec<Cdpi> {
            list.iter()
                .enumerate()
                .filter(|(i, _)| keep.contains(&f(*i)))
                .map(|(_, e)| e.clone())
                .collect()
        };
        let pick_o = |list: &[Cdoe], f: fn(usize) -> ExampleRef| -> Vec<Cdoe> {
            list.iter()
                .enumerate()
                .filter(|(i, _)| keep.contains(&f(*i)))
                .map(|(_, o)| o.clone())
                .collect()
        };
        LearningTask {
            background: self.background.clone(),
            hypothesis_space: self.hypothesis_space.clone(),
            positives: pick(&self.positives, ExampleRef::Positive),
            negatives: pick(&self.negatives, ExampleRef::Negative),
            brave_orderings: pick_o(&self.brave_orderings, ExampleRef::Brave),
            cautious_orderings: pick_o(&self.cautious_orderings, ExampleRef::Cautious),
        }
    }
}

impl fmt::Display for ExampleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleRef::Positive(i) => write!(f, "positive #{i}"),
            ExampleRef::Negative(i) => write!(f, "negative #{i}"),
            ExampleRef::Brave(i) => write!(f, "brave ordering #{i}"),
            ExampleRef::Cautious(i) => write!(f, "cautious ordering #{i}"),
        }
    }
}

fn program_for(b: &Program, h: &Program, ex: &Cdpi) -> Program {
    let mut p = b.clone();
    p.extend(&ex.context);
    p.extend(h);
    p
}

/// Whether some answer set of `B ∪ C ∪ H` extends the example (positive),
/// or none does (negative).
pub fn covers_cdpi(b: &Program, h: &Program, ex: &Cdpi, polarity: Polarity, budget: usize) -> Result<bool> {
    let g = ground(&program_for(b, h, ex), budget)?;
    let sat = Solver::new(&g).satisfiable(&assumptions_for(&g, &ex.example));
    Ok(match polarity {
        Polarity::Positive => sat,
        Polarity::Negative => !sat,
    })
}

/// Distinct score tables of the answer sets of `B ∪ C ∪ H` extending the
/// example.
fn endpoint_tables(b: &Program, h: &Program, ex: &Cdpi, budget: usize) -> Result<BTreeSet<ScoreTable>> {
    let g = ground(&program_for(b, h, ex), budget)?;
    let mut solver = Solver::new(&g);
    let mut tables = BTreeSet::new();
    let mut err = None;
    solver.solve(&assumptions_for(&g, &ex.example), |truth| {
        match table_of(&weak_tuples_ids(&g, truth)) {
            Ok(t) => {
                tables.insert(t);
            }
            Err(e) => {
                err = Some(e);
                return std::ops::ControlFlow::Break(());
            }
        }
        std::ops::ControlFlow::Continue(())
    });
    match err {
        Some(e) => Err(e),
        None => Ok(tables),
    }
}

pub fn respects_ordering(
    b: &Program,
    h: &Program,
    first: &Cdpi,
    second: &Cdpi,
    relation: Relation,
    mode: Mode,
    budget: usize,
) -> Result<bool> {
    let t1 = endpoint_tables(b, h, first, budget)?;
    let t2 = endpoint_tables(b, h, second, budget)?;
    let holds = |a: &ScoreTable, c: &ScoreTable| match relation {
        Relation::Strict => table_dominates(a, c),
        Relation::Equal => a == c,
    };
    let mut pairs = t1.iter().flat_map(|a| t2.iter().map(move |c| (a, c)));
    Ok(match mode {
        Mode::Brave => pairs.any(|(a, c)| holds(a, c)),
        Mode::Cautious => pairs.all(|(a, c)| holds(a, c)),
    })
}

/// Direct verdict for one example.
pub fn covers_example(t: &LearningTask, h: &Program, r: ExampleRef, budget: usize) -> Result<bool> {
    let b = &t.background;
    let ordering = |o: &Cdoe, mode| {
        let first = t.positive(&o.first).ok_or_else(|| Error::OrderingOverNonPositive(o.first.clone()))?;
        let second = t
            .positive(&o.second)
            .ok_or_else(|| Error::OrderingOverNonPositive(o.second.clone()))?;
        respects_ordering(b, h, first, second, o.relation, mode, budget)
    };
    match r {
        ExampleRef::Positive(i) => covers_cdpi(b, h, &t.positives[i], Polarity::Positive, budget),
        ExampleRef::Negative(i) => covers_cdpi(b, h, &t.negatives[i], Polarity::Negative, budget),
        ExampleRef::Brave(i) => ordering(&t.brave_orderings[i], Mode::Brave),
        ExampleRef::Cautious(i) => ordering(&t.cautious_orderings[i], Mode::Cautious),
    }
}

/// Whether `h` covers every example of `t`.
pub fn is_solution(t: &LearningTask, h: &Program, budget: usize) -> Result<bool> {
    for r in t.example_refs() {
        if !covers_example(t, h, r, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every subset of the hypothesis space (as index lists) that solves `t`.
/// Exponential; meant for small spaces.
pub fn all_solutions(t: &LearningTask, budget: usize) -> Result<Vec<Vec<usize>>> {
    let n = t.hypothesis_space.len();
    assert!(n < 20, "hypothesis space too large for exhaustive enumeration");
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let indices: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let h = Hypothesis::new(indices.clone(), &t.hypothesis_space).program(&t.hypothesis_space);
        if is_solution(t, &h, budget)? {
            out.push(indices);
        }
    }
    Ok(out)
}

pub fn ctx_atom(id: &str) -> Result<Atom> {
    Ok(Atom::new(CTX, vec![id_term(id)?]))
}

/// Folds every context into the background, guarded by a `ctx(id)` atom
/// that is chosen exactly once, and adds that atom to each example.
pub fn translate_loas(t: &LearningTask) -> Result<LearningTask> {
    t.validate()?;
    if t.uses_predicate(CTX) {
        return Err(Error::NameClash(CTX.to_string()));
    }
    if t.positives.is_empty() && t.negatives.is_empty() {
        return Ok(t.clone());
    }
    let mut background = t.background.clone();
    let mut guards = Vec::new();
    let mut convert = |ex: &Cdpi| -> Result<Cdpi> {
        let guard = ctx_atom(&ex.id)?;
        background.extend(&append_body(&ex.context, &guard));
        guards.push(guard.clone());
        let mut example = ex.example.clone();
        example.inc.insert(guard);
        Ok(Cdpi {
            id: ex.id.clone(),
            example,
            context: Program::default(),
        })
    };
    let positives = t.positives.iter().map(&mut convert).collect::<Result<Vec<_>>>()?;
    let negatives = t.negatives.iter().map(&mut convert).collect::<Result<Vec<_>>>()?;
    background.rules.push(Rule::choice(1, Some(1), guards, Vec::new()));
    Ok(LearningTask {
        background,
        hypothesis_space: t.hypothesis_space.clone(),
        positives,
        negatives,
        brave_orderings: t.brave_orderings.clone(),
        cautious_orderings: t.cautious_orderings.clone(),
    })
}
