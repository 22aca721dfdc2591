//! Optimal hypothesis search.
//!
//! [`learn_batch`] is an iterative-deepening search over hypothesis length
//! that returns the lexicographically first shortest solution.
//! [`learn_iterative`] wraps it in the relevant-example loop: find an
//! example the current hypothesis misses, add it to the relevant set and
//! re-solve the task restricted to relevant examples.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;
use std::rc::Rc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::ground::{ground, AtomId, GroundHead, GroundProgram, DEFAULT_ATOM_BUDGET};
use crate::meta::{find_relevant_with, FirstUncovered, SelectionStrategy};
use crate::preference::{table_dominates, ScoreTable};
use crate::solve::{assumptions_for, Solver};
use crate::syntax::{Program, Rule, Term};
use crate::task::{translate_loas, ExampleRef, Hypothesis, LearningTask, Relation};

#[derive(Clone)]
pub struct LearnOptions {
    pub atom_budget: usize,
    pub timeout: Option<Duration>,
    pub selection: Arc<dyn SelectionStrategy>,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            atom_budget: DEFAULT_ATOM_BUDGET,
            timeout: None,
            selection: Arc::new(FirstUncovered),
        }
    }
}

impl std::fmt::Debug for LearnOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LearnOptions")
            .field("atom_budget", &self.atom_budget)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Hypothesis(Hypothesis),
    Unsatisfiable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub example: String,
    pub hypothesis: Vec<usize>,
    pub length: usize,
}

#[derive(Clone, Debug, Default)]
pub struct LearnStats {
    pub iterations: usize,
    pub relevant_size: usize,
    pub solver_calls: usize,
    pub wall_time: Duration,
    /// Largest grounding built by a hypothesis search.
    pub peak_ground_atoms: usize,
    /// Largest meta-program grounding built while looking for relevant
    /// examples.
    pub meta_ground_atoms: usize,
    pub candidates: usize,
    pub trace: Vec<TraceRecord>,
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    pub outcome: Outcome,
    pub stats: LearnStats,
}

impl LearnResult {
    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match &self.outcome {
            Outcome::Hypothesis(h) => Some(h),
            Outcome::Unsatisfiable => None,
        }
    }
}

/// Examples accumulated by the iterative loop.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelevantSet {
    refs: BTreeSet<ExampleRef>,
}

impl RelevantSet {
    /// Returns false if the example was already relevant.
    pub fn insert(&mut self, r: ExampleRef) -> bool {
        self.refs.insert(r)
    }

    pub fn contains(&self, r: ExampleRef) -> bool {
        self.refs.contains(&r)
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn refs(&self) -> &BTreeSet<ExampleRef> {
        &self.refs
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.refs.iter().filter_map(|r| match r {
            ExampleRef::Positive(i) => Some(*i),
            _ => None,
        })
    }
}

struct Deadline(Option<Instant>);

impl Deadline {
    fn new(timeout: Option<Duration>) -> Self {
        Deadline(timeout.map(|t| Instant::now() + t))
    }

    fn check(&self) -> Result<()> {
        match self.0 {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

/// Weak tuples of one answer set, tagged with the rule that produced them.
type ModelTuples = Vec<(usize, u32)>;

#[derive(Default)]
struct Entry {
    /// Satisfiability per example of the flat example list.
    sat: Vec<Option<bool>>,
    /// Weak tuples of every answer set extending a positive example.
    models: HashMap<usize, Rc<Vec<ModelTuples>>>,
}

/// Search over a context-free task: `B ∪ S_M` is ground once and each
/// candidate hypothesis switches rules on by origin.
struct Search<'a> {
    task: &'a LearningTask,
    g: GroundProgram,
    background_len: usize,
    weak_space: Vec<bool>,
    lengths: Vec<usize>,
    /// Assumptions for positives then negatives.
    assumptions: Vec<Vec<(AtomId, bool)>>,
    /// Ordering endpoints as positive indices.
    endpoints: Vec<(usize, usize)>,
    tuples: IndexSet<(i64, i64, Vec<Term>)>,
    weak_by_origin: Vec<usize>,
    cache: HashMap<Vec<usize>, Entry>,
    current: Option<(Vec<usize>, Solver)>,
    order: Vec<ExampleRef>,
    solver_calls: usize,
    candidates: usize,
}

impl<'a> Search<'a> {
    fn new(task: &'a LearningTask, budget: usize) -> Result<Self> {
        let mut program = task.background.clone();
        program.rules.extend(task.hypothesis_space.iter().cloned());
        let g = ground(&program, budget)?;
        let assumptions = task
            .positives
            .iter()
            .chain(&task.negatives)
            .map(|ex| assumptions_for(&g, &ex.example))
            .collect();
        let endpoint = |id: &str| {
            task.positive_index(id)
                .ok_or_else(|| Error::OrderingOverNonPositive(id.to_string()))
        };
        let endpoints = task
            .brave_orderings
            .iter()
            .chain(&task.cautious_orderings)
            .map(|o| Ok((endpoint(&o.first)?, endpoint(&o.second)?)))
            .collect::<Result<_>>()?;
        let weak_by_origin = g
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_weak())
            .map(|(i, _)| i)
            .collect();
        Ok(Search {
            task,
            background_len: task.background.len(),
            weak_space: task.hypothesis_space.iter().map(Rule::is_weak).collect(),
            lengths: task.hypothesis_space.iter().map(Rule::literal_count).collect(),
            g,
            assumptions,
            endpoints,
            tuples: IndexSet::new(),
            weak_by_origin,
            cache: HashMap::new(),
            current: None,
            order: task.example_refs(),
            solver_calls: 0,
            candidates: 0,
        })
    }

    fn solver_for(&mut self, hard: &[usize]) -> &mut Solver {
        let stale = self.current.as_ref().map_or(true, |(key, _)| key != hard);
        if stale {
            let nb = self.background_len;
            let mut enabled = vec![false; self.task.hypothesis_space.len()];
            for &i in hard {
                enabled[i] = true;
            }
            let solver = Solver::with_filter(&self.g, |origin| origin < nb || enabled[origin - nb]);
            self.current = Some((hard.to_vec(), solver));
        }
        &mut self.current.as_mut().expect("solver just built").1
    }

    fn satisfiable(&mut self, hard: &[usize], flat: usize) -> bool {
        if let Some(Some(v)) = self.cache.get(hard).map(|e| e.sat.get(flat).copied().flatten()) {
            return v;
        }
        let assumptions = self.assumptions[flat].clone();
        self.solver_calls += 1;
        let sat = self.solver_for(hard).satisfiable(&assumptions);
        let n = self.assumptions.len();
        let entry = self.cache.entry(hard.to_vec()).or_default();
        entry.sat.resize(n, None);
        entry.sat[flat] = Some(sat);
        sat
    }

    fn models(&mut self, hard: &[usize], positive: usize) -> Rc<Vec<ModelTuples>> {
        if let Some(m) = self.cache.get(hard).and_then(|e| e.models.get(&positive)) {
            return m.clone();
        }
        let assumptions = self.assumptions[positive].clone();
        self.solver_calls += 1;
        let mut truths = Vec::new();
        self.solver_for(hard).solve(&assumptions, |truth| {
            truths.push(truth.to_vec());
            ControlFlow::Continue(())
        });
        let models: Vec<ModelTuples> = truths.iter().map(|t| self.tuples_of(t)).collect();
        let models = Rc::new(models);
        self.cache
            .entry(hard.to_vec())
            .or_default()
            .models
            .insert(positive, models.clone());
        models
    }

    fn tuples_of(&mut self, truth: &[bool]) -> ModelTuples {
        let mut out = Vec::new();
        for &ri in &self.weak_by_origin {
            let rule = &self.g.rules[ri];
            if !rule.body_holds(truth) {
                continue;
            }
            if let GroundHead::Weak { weight, level, terms } = &rule.head {
                let (id, _) = self.tuples.insert_full((*weight, *level, terms.clone()));
                out.push((rule.origin, id as u32));
            }
        }
        out.sort_unstable();
        out
    }

    fn table(&self, model: &ModelTuples, weak_on: &[bool]) -> Result<ScoreTable> {
        let nb = self.background_len;
        let mut ids: Vec<u32> = model
            .iter()
            .filter(|(origin, _)| *origin < nb || weak_on[*origin - nb])
            .map(|&(_, id)| id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let mut table = ScoreTable::new();
        for id in ids {
            let (w, l, _) = &self.tuples[id as usize];
            let slot = table.entry(*l).or_insert(0);
            *slot = slot.checked_add(*w).ok_or(Error::Overflow("summing weak constraint weights"))?;
        }
        table.retain(|_, s| *s != 0);
        Ok(table)
    }

    fn covers(&mut self, r: ExampleRef, hard: &[usize], weak_on: &[bool]) -> Result<bool> {
        let npos = self.task.positives.len();
        let nbrave = self.task.brave_orderings.len();
        match r {
            ExampleRef::Positive(i) => Ok(self.satisfiable(hard, i)),
            ExampleRef::Negative(i) => Ok(!self.satisfiable(hard, npos + i)),
            ExampleRef::Brave(i) | ExampleRef::Cautious(i) => {
                let (k, o) = match r {
                    ExampleRef::Brave(_) => (i, &self.task.brave_orderings[i]),
                    _ => (nbrave + i, &self.task.cautious_orderings[i]),
                };
                let relation = o.relation;
                let (a, b) = self.endpoints[k];
                let first = self.models(hard, a);
                let second = self.models(hard, b);
                let t1: BTreeSet<ScoreTable> = first.iter().map(|m| self.table(m, weak_on)).collect::<Result<_>>()?;
                let t2: BTreeSet<ScoreTable> = second.iter().map(|m| self.table(m, weak_on)).collect::<Result<_>>()?;
                let holds = |x: &ScoreTable, y: &ScoreTable| match relation {
                    Relation::Strict => table_dominates(x, y),
                    Relation::Equal => x == y,
                };
                let mut pairs = t1.iter().flat_map(|x| t2.iter().map(move |y| (x, y)));
                Ok(if matches!(r, ExampleRef::Brave(_)) {
                    pairs.any(|(x, y)| holds(x, y))
                } else {
                    pairs.all(|(x, y)| holds(x, y))
                })
            }
        }
    }

    /// Checks every example, starting with the one that failed most recently.
    fn is_solution(&mut self, indices: &[usize]) -> Result<bool> {
        self.candidates += 1;
        let hard: Vec<usize> = indices.iter().copied().filter(|&i| !self.weak_space[i]).collect();
        let mut weak_on = vec![false; self.weak_space.len()];
        for &i in indices {
            weak_on[i] = self.weak_space[i];
        }
        for pos in 0..self.order.len() {
            let r = self.order[pos];
            if !self.covers(r, &hard, &weak_on)? {
                self.order[..=pos].rotate_right(1);
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Shortest solution, ties broken by the lexicographically first index
    /// list.
    fn run(&mut self, deadline: &Deadline) -> Result<Option<Hypothesis>> {
        let total: usize = self.lengths.iter().sum();
        let mut suffix = vec![0; self.lengths.len() + 1];
        for i in (0..self.lengths.len()).rev() {
            suffix[i] = suffix[i + 1] + self.lengths[i];
        }
        for n in 0..=total {
            let mut current = Vec::new();
            let mut found = None;
            let mut failure = None;
            let _ = self.enumerate(0, n, &suffix, &mut current, &mut |search, subset| {
                if let Err(e) = deadline.check() {
                    failure = Some(e);
                    return ControlFlow::Break(());
                }
                match search.is_solution(subset) {
                    Ok(true) => {
                        found = Some(subset.to_vec());
                        ControlFlow::Break(())
                    }
                    Ok(false) => ControlFlow::Continue(()),
                    Err(e) => {
                        failure = Some(e);
                        ControlFlow::Break(())
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            if let Some(indices) = found {
                return Ok(Some(Hypothesis::new(indices, &self.task.hypothesis_space)));
            }
        }
        Ok(None)
    }

    fn enumerate(
        &mut self,
        start: usize,
        remaining: usize,
        suffix: &[usize],
        current: &mut Vec<usize>,
        visit: &mut dyn FnMut(&mut Self, &[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if remaining == 0 {
            visit(self, current)?;
        }
        for i in start..self.lengths.len() {
            if suffix[i] < remaining {
                break;
            }
            if self.lengths[i] > remaining {
                continue;
            }
            current.push(i);
            let flow = self.enumerate(i + 1, remaining - self.lengths[i], suffix, current, visit);
            current.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Runs the optimal search on `t`, translating it first if any example
/// carries a context.
fn optimal(t: &LearningTask, opts: &LearnOptions, deadline: &Deadline, stats: &mut LearnStats) -> Result<Option<Hypothesis>> {
    let translated;
    let task = if t.has_contexts() {
        translated = translate_loas(t)?;
        &translated
    } else {
        t
    };
    let mut search = Search::new(task, opts.atom_budget)?;
    stats.peak_ground_atoms = stats.peak_ground_atoms.max(search.g.atom_count());
    let result = search.run(deadline);
    stats.solver_calls += search.solver_calls;
    stats.candidates += search.candidates;
    result
}

fn finish(outcome: Option<Hypothesis>, mut stats: LearnStats, start: Instant) -> LearnResult {
    stats.wall_time = start.elapsed();
    LearnResult {
        outcome: outcome.map_or(Outcome::Unsatisfiable, Outcome::Hypothesis),
        stats,
    }
}

/// Shortest hypothesis covering every example of `t`.
pub fn learn_batch(t: &LearningTask, opts: &LearnOptions) -> Result<LearnResult> {
    let start = Instant::now();
    t.validate()?;
    let deadline = Deadline::new(opts.timeout);
    let mut stats = LearnStats {
        relevant_size: t.example_count(),
        ..Default::default()
    };
    let outcome = optimal(t, opts, &deadline, &mut stats)?;
    Ok(finish(outcome, stats, start))
}

fn iterate(t: &LearningTask, opts: &LearnOptions, start: Instant) -> Result<LearnResult> {
    let deadline = Deadline::new(opts.timeout.map(|d| d.saturating_sub(start.elapsed())));
    let space = &t.hypothesis_space;
    let mut stats = LearnStats::default();
    let mut h = Hypothesis::empty();
    let mut relevant = RelevantSet::default();
    loop {
        deadline.check()?;
        let program: Program = h.program(space);
        let found = find_relevant_with(t, &program, opts.atom_budget, opts.selection.as_ref())?;
        stats.meta_ground_atoms = stats.meta_ground_atoms.max(found.ground_atoms);
        stats.solver_calls += found.solver_calls;
        let Some(re) = found.example else {
            stats.relevant_size = relevant.len();
            return Ok(finish(Some(h), stats, start));
        };
        assert!(
            relevant.insert(re),
            "example {} selected twice; the hypothesis should cover it",
            t.example_id(re)
        );
        let orderings = match re {
            ExampleRef::Brave(i) => Some(&t.brave_orderings[i]),
            ExampleRef::Cautious(i) => Some(&t.cautious_orderings[i]),
            _ => None,
        };
        if let Some(o) = orderings {
            for end in [&o.first, &o.second] {
                let idx = t
                    .positive_index(end)
                    .ok_or_else(|| Error::OrderingOverNonPositive(end.clone()))?;
                relevant.insert(ExampleRef::Positive(idx));
            }
        }
        stats.iterations += 1;
        let sub = t.restrict(relevant.refs());
        match optimal(&sub, opts, &deadline, &mut stats)? {
            Some(next) => h = next,
            None => {
                stats.relevant_size = relevant.len();
                return Ok(finish(None, stats, start));
            }
        }
        stats.trace.push(TraceRecord {
            iteration: stats.iterations,
            example: t.example_id(re).to_string(),
            hypothesis: h.indices.clone(),
            length: h.length,
        });
    }
}

/// The relevant-example loop. Each inner search sees only the relevant
/// examples, and therefore only their contexts.
pub fn learn_iterative(t: &LearningTask, opts: &LearnOptions) -> Result<LearnResult> {
    let start = Instant::now();
    t.validate()?;
    iterate(t, opts, start)
}

/// The relevant-example loop run on the translated task, so every inner
/// search grounds the contexts of all examples.
pub fn learn_iterative_pretranslated(t: &LearningTask, opts: &LearnOptions) -> Result<LearnResult> {
    let start = Instant::now();
    let translated = translate_loas(t)?;
    iterate(&translated, opts, start)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LearnMode {
    Batch,
    Iterative,
    IterativePretranslated,
}

impl LearnMode {
    pub const ALL: [LearnMode; 3] = [LearnMode::Batch, LearnMode::Iterative, LearnMode::IterativePretranslated];

    pub fn name(self) -> &'static str {
        match self {
            LearnMode::Batch => "batch",
            LearnMode::Iterative => "iterative",
            LearnMode::IterativePretranslated => "iterative_pt",
        }
    }

    pub fn run(self, t: &LearningTask, opts: &LearnOptions) -> Result<LearnResult> {
        match self {
            LearnMode::Batch => learn_batch(t, opts),
            LearnMode::Iterative => learn_iterative(t, opts),
            LearnMode::IterativePretranslated => learn_iterative_pretranslated(t, opts),
        }
    }
}

impl std::str::FromStr for LearnMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        LearnMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown learning mode `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::PartialInterpretation;
    use crate::syntax::{parse_program, Atom};
    use crate::task::Cdpi;

    fn go_out_task() -> LearningTask {
        let mut t = LearningTask::new(
            Program::default(),
            parse_program("go_out :- not raining. go_out. raining :- not go_out.").unwrap().rules,
        );
        let go: Atom = "go_out".parse().unwrap();
        t.add_positive(Cdpi::new("e1", PartialInterpretation::new([go.clone()], []), Program::default()));
        t.add_positive(Cdpi::new(
            "e2",
            PartialInterpretation::new([], [go]),
            parse_program("raining.").unwrap(),
        ));
        t
    }

    #[test]
    fn all_modes_agree_on_go_out() {
        let t = go_out_task();
        for mode in LearnMode::ALL {
            let r = mode.run(&t, &LearnOptions::default()).unwrap();
            let h = r.hypothesis().expect("satisfiable");
            assert_eq!(h.indices, vec![0], "{}", mode.name());
            assert_eq!(h.length, 2);
        }
    }

    #[test]
    fn iterative_stats() {
        let r = learn_iterative(&go_out_task(), &LearnOptions::default()).unwrap();
        assert!(r.stats.relevant_size <= 2);
        assert_eq!(r.stats.trace.len(), r.stats.iterations);
    }

    #[test]
    fn no_examples() {
        let t = LearningTask::new(Program::default(), parse_program("p.").unwrap().rules);
        for mode in LearnMode::ALL {
            let r = mode.run(&t, &LearnOptions::default()).unwrap();
            assert_eq!(r.hypothesis().unwrap().length, 0);
            assert_eq!(r.stats.iterations, 0);
        }
    }

    #[test]
    fn contradictory_examples() {
        let mut t = LearningTask::new(Program::default(), parse_program("p.").unwrap().rules);
        let p: Atom = "p".parse().unwrap();
        t.add_positive(Cdpi::new("a", PartialInterpretation::new([p.clone()], []), Program::default()));
        t.add_negative(Cdpi::new("b", PartialInterpretation::new([p], []), Program::default()));
        for mode in LearnMode::ALL {
            assert_eq!(mode.run(&t, &LearnOptions::default()).unwrap().outcome, Outcome::Unsatisfiable);
        }
    }

    #[test]
    fn timeout_is_reported() {
        let opts = LearnOptions {
            timeout: Some(Duration::ZERO),
            ..Default::default()
        };
        assert!(matches!(learn_batch(&go_out_task(), &opts), Err(Error::Timeout)));
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in LearnMode::ALL {
            assert_eq!(mode.name().parse::<LearnMode>().unwrap(), mode);
        }
    }
}
