//! Answer-set enumeration for ground programs.
//!
//! The search is a chronological DPLL over atoms. Propagation combines the
//! program completion (forward inference, backward inference and support),
//! choice cardinalities, and for non-tight programs a greatest unfounded
//! set pass. Every total assignment is re-checked against the reduct before
//! it is reported.

mod check;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

pub use check::{is_answer_set, is_answer_set_ids};

use crate::error::{Error, Result};
use crate::ground::{AtomId, GroundHead, GroundProgram};
use crate::syntax::Atom;

pub type Interpretation = BTreeSet<Atom>;
pub type AnswerSet = Interpretation;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialInterpretation {
    pub inc: BTreeSet<Atom>,
    pub exc: BTreeSet<Atom>,
}

impl PartialInterpretation {
    pub fn new(inc: impl IntoIterator<Item = Atom>, exc: impl IntoIterator<Item = Atom>) -> Self {
        PartialInterpretation {
            inc: inc.into_iter().collect(),
            exc: exc.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.inc.is_empty() && self.exc.is_empty()
    }
}

pub fn extends(a: &Interpretation, e: &PartialInterpretation) -> bool {
    e.inc.is_subset(a) && e.exc.is_disjoint(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Unknown,
    True,
    False,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Normal(AtomId),
    Constraint,
    Choice { lower: usize, upper: usize },
}

#[derive(Clone, Debug)]
struct SRule {
    kind: Kind,
    elements: Vec<AtomId>,
    pos: Vec<AtomId>,
    neg: Vec<AtomId>,
}

#[derive(Clone, Copy)]
enum BodyState {
    True,
    False,
    /// Undecided; carries the only undecided literal when there is exactly one.
    Open(usize, Option<(AtomId, bool)>),
}

struct Conflict;

/// A reusable search engine over one ground program (optionally restricted
/// to a subset of its rules).
pub struct Solver {
    n: usize,
    rules: Vec<SRule>,
    /// Rules mentioning each atom anywhere.
    occurs: Vec<Vec<usize>>,
    /// Rules whose head can derive each atom.
    supporters: Vec<Vec<usize>>,
    /// Rules having each atom in the positive body.
    pos_occurs: Vec<Vec<usize>>,
    tight: bool,
    value: Vec<Value>,
    trail: Vec<AtomId>,
    calls: usize,
}

impl Solver {
    pub fn new(program: &GroundProgram) -> Self {
        Self::with_filter(program, |_| true)
    }

    /// Keeps only rules whose origin satisfies `keep`; weak constraints are
    /// always ignored.
    pub fn with_filter(program: &GroundProgram, keep: impl Fn(usize) -> bool) -> Self {
        let n = program.atom_count();
        let mut rules = Vec::new();
        for r in &program.rules {
            if !keep(r.origin) {
                continue;
            }
            let (kind, elements) = match &r.head {
                GroundHead::Weak { .. } => continue,
                GroundHead::Atom(h) => (Kind::Normal(*h), vec![*h]),
                GroundHead::Constraint => (Kind::Constraint, Vec::new()),
                GroundHead::Choice {
                    lower,
                    upper,
                    elements,
                } => (
                    Kind::Choice {
                        lower: *lower,
                        upper: *upper,
                    },
                    elements.clone(),
                ),
            };
            rules.push(SRule {
                kind,
                elements,
                pos: r.pos.clone(),
                neg: r.neg.clone(),
            });
        }
        let mut occurs = vec![Vec::new(); n];
        let mut supporters = vec![Vec::new(); n];
        let mut pos_occurs = vec![Vec::new(); n];
        for (i, r) in rules.iter().enumerate() {
            for &a in r.elements.iter().chain(&r.pos).chain(&r.neg) {
                let list: &mut Vec<usize> = &mut occurs[a as usize];
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
            for &a in &r.elements {
                supporters[a as usize].push(i);
            }
            for &a in &r.pos {
                pos_occurs[a as usize].push(i);
            }
        }
        for list in &mut occurs {
            list.dedup();
        }
        let tight = is_tight(n, &rules);
        Solver {
            n,
            rules,
            occurs,
            supporters,
            pos_occurs,
            tight,
            value: vec![Value::Unknown; n],
            trail: Vec::new(),
            calls: 0,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.n
    }

    /// Number of `solve` invocations so far.
    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Enumerates the answer sets agreeing with `assumptions`, passing each
    /// one as a truth vector indexed by atom id. Atoms outside the program
    /// are false; requiring one to be true yields no answer sets.
    pub fn solve<F>(&mut self, assumptions: &[(AtomId, bool)], mut on_model: F)
    where
        F: FnMut(&[bool]) -> ControlFlow<()>,
    {
        self.calls += 1;
        self.value.iter_mut().for_each(|v| *v = Value::Unknown);
        self.trail.clear();

        for &(a, truth) in assumptions {
            if a as usize >= self.n {
                if truth {
                    return;
                }
                continue;
            }
            if self.assign(a, truth).is_err() {
                return;
            }
        }
        if self.initial_propagation().is_err() {
            return;
        }

        // (trail length before decision, atom, flipped)
        let mut decisions: Vec<(usize, AtomId, bool)> = Vec::new();
        let mut truth = vec![false; self.n];
        loop {
            let next = (0..self.n).find(|&a| self.value[a] == Value::Unknown);
            let backtrack = match next {
                Some(a) => {
                    let mark = self.trail.len();
                    decisions.push((mark, a as AtomId, false));
                    let ok = self.assign(a as AtomId, false).is_ok() && self.propagate_all(mark).is_ok();
                    !ok
                }
                None => {
                    for (t, v) in truth.iter_mut().zip(&self.value) {
                        *t = *v == Value::True;
                    }
                    debug_assert!(self.check_total(&truth));
                    if self.check_total(&truth) && on_model(&truth).is_break() {
                        return;
                    }
                    true
                }
            };
            if backtrack && !self.backtrack(&mut decisions) {
                return;
            }
        }
    }

    /// Undoes decisions until one can be flipped without conflict.
    fn backtrack(&mut self, decisions: &mut Vec<(usize, AtomId, bool)>) -> bool {
        while let Some((mark, atom, flipped)) = decisions.pop() {
            self.undo(mark);
            if flipped {
                continue;
            }
            decisions.push((mark, atom, true));
            if self.assign(atom, true).is_ok() && self.propagate_all(mark).is_ok() {
                return true;
            }
        }
        false
    }

    fn undo(&mut self, mark: usize) {
        for a in self.trail.drain(mark..) {
            self.value[a as usize] = Value::Unknown;
        }
    }

    fn assign(&mut self, a: AtomId, truth: bool) -> Result<(), Conflict> {
        let want = if truth { Value::True } else { Value::False };
        match self.value[a as usize] {
            Value::Unknown => {
                self.value[a as usize] = want;
                self.trail.push(a);
                Ok(())
            }
            v if v == want => Ok(()),
            _ => Err(Conflict),
        }
    }

    fn propagate_all(&mut self, from: usize) -> Result<(), Conflict> {
        let mut head = from;
        loop {
            self.propagate_trail(&mut head)?;
            if self.tight || !self.unfounded_pass()? {
                return Ok(());
            }
        }
    }

    fn initial_propagation(&mut self) -> Result<(), Conflict> {
        for r in 0..self.rules.len() {
            self.check_rule(r)?;
        }
        for a in 0..self.n {
            self.check_support(a)?;
        }
        self.propagate_all(0)
    }

    fn propagate_trail(&mut self, head: &mut usize) -> Result<(), Conflict> {
        while *head < self.trail.len() {
            let a = self.trail[*head] as usize;
            *head += 1;
            self.check_support(a)?;
            for i in 0..self.occurs[a].len() {
                let r = self.occurs[a][i];
                self.check_rule(r)?;
            }
        }
        Ok(())
    }

    fn lit_value(&self, a: AtomId, positive: bool) -> Value {
        match (self.value[a as usize], positive) {
            (Value::Unknown, _) => Value::Unknown,
            (Value::True, true) | (Value::False, false) => Value::True,
            _ => Value::False,
        }
    }

    fn body_state(&self, r: &SRule) -> BodyState {
        let mut open = 0;
        let mut last = None;
        let lits = r.pos.iter().map(|&a| (a, true)).chain(r.neg.iter().map(|&a| (a, false)));
        for (a, positive) in lits {
            match self.lit_value(a, positive) {
                Value::False => return BodyState::False,
                Value::Unknown => {
                    open += 1;
                    last = Some((a, positive));
                }
                Value::True => {}
            }
        }
        match open {
            0 => BodyState::True,
            1 => BodyState::Open(1, last),
            k => BodyState::Open(k, None),
        }
    }

    /// Makes the body false given it has at most one undecided literal.
    fn falsify_body(&mut self, state: BodyState) -> Result<(), Conflict> {
        match state {
            BodyState::True => Err(Conflict),
            BodyState::Open(1, Some((a, positive))) => self.assign(a, !positive),
            _ => Ok(()),
        }
    }

    fn check_rule(&mut self, ri: usize) -> Result<(), Conflict> {
        let state = self.body_state(&self.rules[ri]);
        if matches!(state, BodyState::False) {
            return self.check_heads(ri);
        }
        match self.rules[ri].kind {
            Kind::Normal(h) => match (state, self.value[h as usize]) {
                (BodyState::True, _) => self.assign(h, true)?,
                (_, Value::False) => self.falsify_body(state)?,
                _ => {}
            },
            Kind::Constraint => self.falsify_body(state)?,
            Kind::Choice { lower, upper } => {
                let (mut t, mut u) = (0, 0);
                for &e in &self.rules[ri].elements {
                    match self.value[e as usize] {
                        Value::True => t += 1,
                        Value::Unknown => u += 1,
                        Value::False => {}
                    }
                }
                let violated = t > upper || t + u < lower;
                if violated {
                    self.falsify_body(state)?;
                } else if matches!(state, BodyState::True) && u > 0 {
                    if t == upper {
                        self.set_unknown_elements(ri, false)?;
                    } else if t + u == lower {
                        self.set_unknown_elements(ri, true)?;
                    }
                }
            }
        }
        self.check_heads(ri)
    }

    fn set_unknown_elements(&mut self, ri: usize, truth: bool) -> Result<(), Conflict> {
        for i in 0..self.rules[ri].elements.len() {
            let e = self.rules[ri].elements[i];
            if self.value[e as usize] == Value::Unknown {
                self.assign(e, truth)?;
            }
        }
        Ok(())
    }

    fn check_heads(&mut self, ri: usize) -> Result<(), Conflict> {
        for i in 0..self.rules[ri].elements.len() {
            let h = self.rules[ri].elements[i];
            self.check_support(h as usize)?;
        }
        Ok(())
    }

    /// An atom needs a rule with a non-false body; a true atom with a single
    /// such rule forces that body.
    fn check_support(&mut self, a: usize) -> Result<(), Conflict> {
        if self.value[a] == Value::False {
            return Ok(());
        }
        let mut live = None;
        let mut count = 0;
        for &r in &self.supporters[a] {
            if !matches!(self.body_state(&self.rules[r]), BodyState::False) {
                count += 1;
                live = Some(r);
                if count > 1 {
                    return Ok(());
                }
            }
        }
        match (count, self.value[a]) {
            (0, _) => self.assign(a as AtomId, false),
            (1, Value::True) => {
                let r = live.expect("one live supporter");
                for i in 0..self.rules[r].pos.len() {
                    let b = self.rules[r].pos[i];
                    self.assign(b, true)?;
                }
                for i in 0..self.rules[r].neg.len() {
                    let b = self.rules[r].neg[i];
                    self.assign(b, false)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Falsifies atoms that cannot be derived without circular support.
    /// Returns whether anything was assigned.
    fn unfounded_pass(&mut self) -> Result<bool, Conflict> {
        let mut possible = vec![false; self.n];
        let mut remaining: Vec<usize> = vec![usize::MAX; self.rules.len()];
        let mut queue = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            if r.elements.is_empty() {
                continue;
            }
            let blocked = r.neg.iter().any(|&b| self.value[b as usize] == Value::True)
                || r.pos.iter().any(|&b| self.value[b as usize] == Value::False);
            if blocked {
                continue;
            }
            remaining[ri] = r.pos.len();
            if r.pos.is_empty() {
                queue.push(ri);
            }
        }
        while let Some(ri) = queue.pop() {
            for &h in &self.rules[ri].elements {
                let h = h as usize;
                if possible[h] || self.value[h] == Value::False {
                    continue;
                }
                possible[h] = true;
                for &r2 in &self.pos_occurs[h] {
                    if remaining[r2] != usize::MAX {
                        remaining[r2] -= 1;
                        if remaining[r2] == 0 {
                            queue.push(r2);
                        }
                    }
                }
            }
        }
        let mut changed = false;
        for a in 0..self.n {
            if !possible[a] && self.value[a] != Value::False {
                self.assign(a as AtomId, false)?;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Total-assignment stability check against the reduct.
    fn check_total(&self, truth: &[bool]) -> bool {
        let mut derived = vec![false; self.n];
        let mut remaining = vec![usize::MAX; self.rules.len()];
        let mut queue = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            let body = r.pos.iter().all(|&a| truth[a as usize]) && r.neg.iter().all(|&a| !truth[a as usize]);
            match r.kind {
                Kind::Constraint if body => return false,
                Kind::Choice { lower, upper } if body => {
                    let t = r.elements.iter().filter(|&&e| truth[e as usize]).count();
                    if t < lower || t > upper {
                        return false;
                    }
                }
                Kind::Normal(h) if body && !truth[h as usize] => return false,
                _ => {}
            }
            if r.elements.is_empty() || r.neg.iter().any(|&a| truth[a as usize]) {
                continue;
            }
            remaining[ri] = r.pos.len();
            if r.pos.is_empty() {
                queue.push(ri);
            }
        }
        while let Some(ri) = queue.pop() {
            for &h in &self.rules[ri].elements {
                let h = h as usize;
                if derived[h] || !truth[h] {
                    continue;
                }
                derived[h] = true;
                for &r2 in &self.pos_occurs[h] {
                    if remaining[r2] != usize::MAX {
                        remaining[r2] -= 1;
                        if remaining[r2] == 0 {
                            queue.push(r2);
                        }
                    }
                }
            }
        }
        derived == truth
    }

    /// Whether some answer set agrees with the assumptions.
    pub fn satisfiable(&mut self, assumptions: &[(AtomId, bool)]) -> bool {
        let mut found = false;
        self.solve(assumptions, |_| {
            found = true;
            ControlFlow::Break(())
        });
        found
    }

    /// All answer sets agreeing with the assumptions, as sorted id lists.
    pub fn models(&mut self, assumptions: &[(AtomId, bool)], max_models: usize) -> Result<Vec<Vec<AtomId>>> {
        let mut out = Vec::new();
        let mut overflow = false;
        self.solve(assumptions, |truth| {
            if max_models > 0 && out.len() == max_models {
                overflow = true;
                return ControlFlow::Break(());
            }
            out.push(true_ids(truth));
            ControlFlow::Continue(())
        });
        if overflow {
            return Err(Error::ModelBudgetExceeded { budget: max_models });
        }
        out.sort();
        Ok(out)
    }
}

pub fn true_ids(truth: &[bool]) -> Vec<AtomId> {
    truth
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| t.then_some(i as AtomId))
        .collect()
}

/// A program is tight when its positive dependency graph is acyclic.
fn is_tight(n: usize, rules: &[SRule]) -> bool {
    let mut edges = vec![Vec::new(); n];
    for r in rules {
        for &h in &r.elements {
            for &b in &r.pos {
                edges[h as usize].push(b as usize);
            }
        }
    }
    // Iterative DFS cycle detection: 0 unvisited, 1 on stack, 2 done.
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < edges[v].len() {
                let w = edges[v][*i];
                *i += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    true
}

/// Every answer set of `p`, in lexicographic order of atom ids. Fails when
/// there are more than `max_models` (0 means no limit).
pub fn answer_sets(p: &GroundProgram, max_models: usize) -> Result<Vec<AnswerSet>> {
    let models = Solver::new(p).models(&[], max_models)?;
    Ok(models
        .into_iter()
        .map(|ids| ids.into_iter().map(|a| p.atom(a).clone()).collect())
        .collect())
}

/// Maps a partial interpretation onto solver assumptions over `p`.
pub fn assumptions_for(p: &GroundProgram, e: &PartialInterpretation) -> Vec<(AtomId, bool)> {
    let missing = p.atom_count() as AtomId;
    let mut out: Vec<(AtomId, bool)> = e
        .inc
        .iter()
        .map(|a| (p.atom_id(a).unwrap_or(missing), true))
        .collect();
    out.extend(e.exc.iter().filter_map(|a| p.atom_id(a).map(|id| (id, false))));
    out
}
