//! Relevance-based, semi-naive instantiation of non-ground programs.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::syntax::{Atom, Head, Literal, Program, Symbol, Term};

pub const DEFAULT_ATOM_BUDGET: usize = 100_000;

pub type AtomId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundHead {
    Atom(AtomId),
    Constraint,
    /// `upper` is already clamped to the number of elements.
    Choice {
        lower: usize,
        upper: usize,
        elements: Vec<AtomId>,
    },
    Weak {
        weight: i64,
        level: i64,
        terms: Vec<Term>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    /// Index of the source rule in the input program.
    pub origin: usize,
    pub head: GroundHead,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

impl GroundRule {
    pub fn head_atoms(&self) -> &[AtomId] {
        match &self.head {
            GroundHead::Atom(a) => std::slice::from_ref(a),
            GroundHead::Choice { elements, .. } => elements,
            GroundHead::Constraint | GroundHead::Weak { .. } => &[],
        }
    }

    pub fn is_weak(&self) -> bool {
        matches!(self.head, GroundHead::Weak { .. })
    }

    /// Body satisfaction under a truth assignment indexed by atom id.
    pub fn body_holds(&self, truth: &[bool]) -> bool {
        self.pos.iter().all(|&a| truth[a as usize]) && self.neg.iter().all(|&a| !truth[a as usize])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    /// The Herbrand base actually reached by instantiation; ids are indices.
    pub atoms: IndexSet<Atom>,
    pub rules: Vec<GroundRule>,
}

impl GroundProgram {
    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.atoms.get_index_of(atom).map(|i| i as AtomId)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn has_weak_constraints(&self) -> bool {
        self.rules.iter().any(GroundRule::is_weak)
    }

    fn write_atom(&self, f: &mut fmt::Formatter<'_>, id: AtomId) -> fmt::Result {
        write!(f, "{}", self.atom(id))
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            match &rule.head {
                GroundHead::Atom(a) => self.write_atom(f, *a)?,
                GroundHead::Constraint => f.write_str(":-")?,
                GroundHead::Weak { .. } => f.write_str(":~")?,
                GroundHead::Choice {
                    lower,
                    upper,
                    elements,
                } => {
                    write!(f, "{lower} {{ ")?;
                    for (i, e) in elements.iter().enumerate() {
                        if i > 0 {
                            f.write_str("; ")?;
                        }
                        self.write_atom(f, *e)?;
                    }
                    write!(f, " }} {upper}")?;
                }
            }
            let has_body = !rule.pos.is_empty() || !rule.neg.is_empty();
            if has_body {
                if matches!(rule.head, GroundHead::Atom(_) | GroundHead::Choice { .. }) {
                    f.write_str(" :-")?;
                }
                let mut first = true;
                for &a in &rule.pos {
                    f.write_str(if first { " " } else { ", " })?;
                    self.write_atom(f, a)?;
                    first = false;
                }
                for &a in &rule.neg {
                    f.write_str(if first { " not " } else { ", not " })?;
                    self.write_atom(f, a)?;
                    first = false;
                }
            } else if matches!(rule.head, GroundHead::Constraint | GroundHead::Weak { .. }) {
                f.write_str(" ")?;
            }
            f.write_str(".")?;
            if let GroundHead::Weak { weight, level, terms } = &rule.head {
                write!(f, " [{weight}@{level}")?;
                for t in terms {
                    write!(f, ", {t}")?;
                }
                f.write_str("]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

type Binding = Vec<(Symbol, Term)>;

fn lookup<'a>(binding: &'a Binding, var: &Symbol) -> Option<&'a Term> {
    binding.iter().rev().find(|(v, _)| v == var).map(|(_, t)| t)
}

fn unify(pattern: &Term, term: &Term, binding: &mut Binding) -> bool {
    match pattern {
        Term::Var(v) => match lookup(binding, v) {
            Some(bound) => bound == term,
            None => {
                binding.push((v.clone(), term.clone()));
                true
            }
        },
        Term::Int(_) | Term::Sym(_) => pattern == term,
        Term::Func(f, args) => match term {
            Term::Func(g, targs) if f == g && args.len() == targs.len() => {
                args.iter().zip(targs).all(|(p, t)| unify(p, t, binding))
            }
            _ => false,
        },
        Term::Range(..) => false,
    }
}

/// Applies a binding; ranges are left in place for later expansion.
fn substitute(term: &Term, binding: &Binding) -> Term {
    match term {
        Term::Var(v) => lookup(binding, v)
            .cloned()
            .unwrap_or_else(|| panic!("unbound variable {v} in a safe rule")),
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(|a| substitute(a, binding)).collect()),
        _ => term.clone(),
    }
}

/// Expands every range inside `term` into the list of its ground instances.
fn expand_term(term: &Term) -> Vec<Term> {
    match term {
        Term::Range(lo, hi) => (*lo..=*hi).map(Term::Int).collect(),
        Term::Func(f, args) if term.has_range() => {
            let mut out = vec![Vec::new()];
            for arg in args {
                let options = expand_term(arg);
                out = out
                    .into_iter()
                    .flat_map(|prefix: Vec<Term>| {
                        options.iter().map(move |o| {
                            let mut next = prefix.clone();
                            next.push(o.clone());
                            next
                        })
                    })
                    .collect();
            }
            out.into_iter().map(|args| Term::Func(f.clone(), args)).collect()
        }
        _ => vec![term.clone()],
    }
}

fn instantiate_atom(atom: &Atom, binding: &Binding) -> Vec<Atom> {
    let term = Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|a| substitute(a, binding)).collect(),
    }
    .to_term();
    expand_term(&term)
        .iter()
        .map(|t| t.to_atom().expect("atom terms stay atoms"))
        .collect()
}

#[derive(Default)]
struct AtomIndex {
    by_pred: HashMap<(Symbol, usize), Vec<AtomId>>,
    by_first: HashMap<(Symbol, usize, Term), Vec<AtomId>>,
}

impl AtomIndex {
    fn insert(&mut self, atom: &Atom, id: AtomId) {
        let key = (atom.predicate.clone(), atom.arity());
        if let Some(first) = atom.args.first() {
            self.by_first
                .entry((key.0.clone(), key.1, first.clone()))
                .or_default()
                .push(id);
        }
        self.by_pred.entry(key).or_default().push(id);
    }

    /// Candidate ids for `pattern` (already substituted) within `[lo, hi)`.
    fn candidates(&self, pattern: &Atom, lo: AtomId, hi: AtomId) -> &[AtomId] {
        let list = match pattern.args.first() {
            Some(first) if first.is_ground() => self
                .by_first
                .get(&(pattern.predicate.clone(), pattern.arity(), first.clone())),
            _ => self.by_pred.get(&(pattern.predicate.clone(), pattern.arity())),
        };
        let Some(list) = list else { return &[] };
        let start = list.partition_point(|&id| id < lo);
        let end = list.partition_point(|&id| id < hi);
        &list[start..end]
    }
}

struct Grounder<'a> {
    program: &'a Program,
    budget: usize,
    atoms: IndexSet<Atom>,
    index: AtomIndex,
    /// (rule index, binding) for every instance found.
    instances: Vec<(usize, Binding)>,
}

impl<'a> Grounder<'a> {
    fn add_atom(&mut self, atom: Atom) -> Result<()> {
        if self.atoms.contains(&atom) {
            return Ok(());
        }
        if self.atoms.len() >= self.budget {
            return Err(Error::AtomBudgetExceeded { budget: self.budget });
        }
        let (id, _) = self.atoms.insert_full(atom);
        let atom = &self.atoms[id];
        self.index.insert(atom, id as AtomId);
        Ok(())
    }

    fn record(&mut self, rule_idx: usize, binding: Binding) -> Result<()> {
        let rule = &self.program.rules[rule_idx];
        for lit in &rule.body {
            if let Literal::Cmp(l, op, r) = lit {
                if !op.holds(&substitute(l, &binding), &substitute(r, &binding)) {
                    return Ok(());
                }
            }
        }
        let heads: Vec<Atom> = rule
            .head_atoms()
            .iter()
            .flat_map(|a| instantiate_atom(a, &binding))
            .collect();
        for atom in heads {
            self.add_atom(atom)?;
        }
        self.instances.push((rule_idx, binding));
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        let positives: Vec<Vec<&'a Atom>> = self
            .program
            .rules
            .iter()
            .map(|r| {
                r.body
                    .iter()
                    .filter_map(|l| match l {
                        Literal::Pos(a) => Some(a),
                        _ => None,
                    })
                    .collect()
            })
            .collect();

        for (idx, pos) in positives.iter().enumerate() {
            if pos.is_empty() {
                self.record(idx, Vec::new())?;
            }
        }

        let mut old_end: AtomId = 0;
        loop {
            let delta_end = self.atoms.len() as AtomId;
            if delta_end == old_end {
                break;
            }
            for (idx, pos) in positives.iter().enumerate() {
                for pivot in 0..pos.len() {
                    let mut found = Vec::new();
                    self.join(pos, 0, pivot, old_end, delta_end, &mut Vec::new(), &mut found);
                    for binding in found {
                        self.record(idx, binding)?;
                    }
                }
            }
            old_end = delta_end;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn join(
        &self,
        pos: &[&Atom],
        depth: usize,
        pivot: usize,
        old_end: AtomId,
        delta_end: AtomId,
        binding: &mut Binding,
        out: &mut Vec<Binding>,
    ) {
        if depth == pos.len() {
            out.push(binding.clone());
            return;
        }
        let (lo, hi) = match depth.cmp(&pivot) {
            std::cmp::Ordering::Less => (0, old_end),
            std::cmp::Ordering::Equal => (old_end, delta_end),
            std::cmp::Ordering::Greater => (0, delta_end),
        };
        let pattern = pos[depth];
        let probe = match pattern.args.first() {
            Some(first) if !first.is_ground() => {
                let substituted = substitute_partial(first, binding);
                let mut p = Atom {
                    predicate: pattern.predicate.clone(),
                    args: Vec::with_capacity(pattern.arity()),
                };
                p.args.push(substituted);
                p.args.extend(pattern.args.iter().skip(1).cloned());
                p
            }
            _ => pattern.clone(),
        };
        for &id in self.index.candidates(&probe, lo, hi) {
            let atom = &self.atoms[id as usize];
            let mark = binding.len();
            if pattern.args.iter().zip(&atom.args).all(|(p, t)| unify(p, t, binding)) {
                self.join(pos, depth + 1, pivot, old_end, delta_end, binding, out);
            }
            binding.truncate(mark);
        }
    }

    fn finish(self) -> Result<GroundProgram> {
        let mut rules = Vec::with_capacity(self.instances.len());
        for (idx, binding) in &self.instances {
            let rule = &self.program.rules[*idx];
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for lit in &rule.body {
                match lit {
                    Literal::Pos(a) => {
                        let g = ground_atom(a, binding);
                        pos.push(self.atoms.get_index_of(&g).expect("matched atom") as AtomId);
                    }
                    Literal::Neg(a) => {
                        let g = ground_atom(a, binding);
                        if let Some(id) = self.atoms.get_index_of(&g) {
                            neg.push(id as AtomId);
                        }
                    }
                    Literal::Cmp(..) => {}
                }
            }
            let id_of = |a: &Atom| self.atoms.get_index_of(a).expect("head atom registered") as AtomId;
            match &rule.head {
                Head::Atom(a) => {
                    for g in instantiate_atom(a, binding) {
                        rules.push(GroundRule {
                            origin: *idx,
                            head: GroundHead::Atom(id_of(&g)),
                            pos: pos.clone(),
                            neg: neg.clone(),
                        });
                    }
                }
                Head::Constraint => rules.push(GroundRule {
                    origin: *idx,
                    head: GroundHead::Constraint,
                    pos,
                    neg,
                }),
                Head::Choice(c) => {
                    let mut elements: IndexSet<AtomId> = IndexSet::new();
                    for a in &c.elements {
                        for g in instantiate_atom(a, binding) {
                            elements.insert(id_of(&g));
                        }
                    }
                    let k = elements.len();
                    let lower = c.lower.max(0) as usize;
                    let upper = c.upper.map_or(k, |u| (u.max(0) as usize).min(k));
                    rules.push(GroundRule {
                        origin: *idx,
                        head: GroundHead::Choice {
                            lower,
                            upper,
                            elements: elements.into_iter().collect(),
                        },
                        pos,
                        neg,
                    });
                }
                Head::Weak(tail) => {
                    let int_of = |t: &Term, what: &'static str| {
                        let g = substitute(t, binding);
                        g.as_int().ok_or_else(|| Error::NonIntegerWeight {
                            what,
                            term: g.to_string(),
                        })
                    };
                    rules.push(GroundRule {
                        origin: *idx,
                        head: GroundHead::Weak {
                            weight: int_of(&tail.weight, "weight")?,
                            level: int_of(&tail.level, "level")?,
                            terms: tail.terms.iter().map(|t| substitute(t, binding)).collect(),
                        },
                        pos,
                        neg,
                    });
                }
            }
        }
        Ok(GroundProgram {
            atoms: self.atoms,
            rules,
        })
    }
}

fn ground_atom(atom: &Atom, binding: &Binding) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|a| substitute(a, binding)).collect(),
    }
}

/// Substitutes bound variables, leaving unbound ones untouched.
fn substitute_partial(term: &Term, binding: &Binding) -> Term {
    match term {
        Term::Var(v) => lookup(binding, v).cloned().unwrap_or_else(|| term.clone()),
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(|a| substitute_partial(a, binding)).collect()),
        _ => term.clone(),
    }
}

/// Instantiates `p` over the atoms reachable from its facts.
///
/// Negative literals over atoms that can never be derived are removed, as
/// are comparison literals once evaluated; an instance whose comparison
/// fails is dropped.
pub fn ground(p: &Program, atom_budget: usize) -> Result<GroundProgram> {
    for rule in &p.rules {
        rule.check_safety()?;
    }
    let mut grounder = Grounder {
        program: p,
        budget: atom_budget,
        atoms: IndexSet::new(),
        index: AtomIndex::default(),
        instances: Vec::new(),
    };
    grounder.run()?;
    grounder.finish()
}
