//! Abstract syntax for the supported ASP fragment: normal rules, choice
//! rules, hard constraints and weak constraints.
//!
//! The concrete syntax is clingo-like:
//!
//! ```text
//! coin(1..2).
//! 1 { val(C, h); val(C, t) } 1 :- coin(C).
//! :- val(1, V), val(2, V).
//! :~ val(C, t). [1@1, C]
//! ```

mod parser;
pub(crate) mod transform;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use parser::{parse_program, ParseError, Parser, Token, TokenKind};
pub use transform::{append_body, reify};

use crate::error::{Error, Result};

/// Interned-by-refcount identifier.
pub type Symbol = Arc<str>;

pub fn sym(name: &str) -> Symbol {
    Arc::from(name)
}

/// A term. The derived ordering puts integers before symbolic constants
/// and those before compound terms, which is the order used by comparison
/// literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i64),
    Sym(Symbol),
    Func(Symbol, Vec<Term>),
    Var(Symbol),
    /// `lo..hi`, only meaningful before grounding.
    Range(i64, i64),
}

impl Term {
    pub fn int(value: i64) -> Self {
        Term::Int(value)
    }

    pub fn constant(name: &str) -> Self {
        Term::Sym(sym(name))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(sym(name))
    }

    pub fn func(name: &str, args: Vec<Term>) -> Self {
        if args.is_empty() {
            Term::Sym(sym(name))
        } else {
            Term::Func(sym(name), args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Int(_) | Term::Sym(_) => true,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            Term::Var(_) | Term::Range(..) => false,
        }
    }

    pub fn has_range(&self) -> bool {
        match self {
            Term::Range(..) => true,
            Term::Func(_, args) => args.iter().any(Term::has_range),
            _ => false,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Reads a compound or constant term back as an atom.
    pub fn to_atom(&self) -> Option<Atom> {
        match self {
            Term::Sym(name) => Some(Atom {
                predicate: name.clone(),
                args: Vec::new(),
            }),
            Term::Func(name, args) => Some(Atom {
                predicate: name.clone(),
                args: args.clone(),
            }),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                write_joined(f, args, ",")?;
                f.write_str(")")
            }
            Term::Range(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: sym(predicate),
            args,
        }
    }

    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Sym(self.predicate.clone())
        } else {
            Term::Func(self.predicate.clone(), self.args.clone())
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_joined(f, &self.args, ",")?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Parser::new(s)?.parse_standalone_atom()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn holds(self, lhs: &Term, rhs: &Term) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos(Atom),
    /// Default negation, `not a`.
    Neg(Atom),
    Cmp(Term, CmpOp, Term),
}

impl Literal {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => Some(a),
            Literal::Cmp(..) => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "not {a}"),
            Literal::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Choice {
    pub lower: i64,
    /// `None` means "number of elements".
    pub upper: Option<i64>,
    pub elements: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeakTail {
    pub weight: Term,
    pub level: Term,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Atom(Atom),
    Constraint,
    Choice(Choice),
    Weak(WeakTail),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Normal,
    Constraint,
    Choice,
    Weak,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn fact(atom: Atom) -> Self {
        Rule {
            head: Head::Atom(atom),
            body: Vec::new(),
        }
    }

    pub fn normal(head: Atom, body: Vec<Literal>) -> Self {
        Rule {
            head: Head::Atom(head),
            body,
        }
    }

    pub fn constraint(body: Vec<Literal>) -> Self {
        Rule {
            head: Head::Constraint,
            body,
        }
    }

    pub fn choice(lower: i64, upper: Option<i64>, elements: Vec<Atom>, body: Vec<Literal>) -> Self {
        Rule {
            head: Head::Choice(Choice {
                lower,
                upper,
                elements,
            }),
            body,
        }
    }

    pub fn weak(body: Vec<Literal>, weight: Term, level: Term, terms: Vec<Term>) -> Self {
        Rule {
            head: Head::Weak(WeakTail {
                weight,
                level,
                terms,
            }),
            body,
        }
    }

    pub fn kind(&self) -> RuleKind {
        match self.head {
            Head::Atom(_) => RuleKind::Normal,
            Head::Constraint => RuleKind::Constraint,
            Head::Choice(_) => RuleKind::Choice,
            Head::Weak(_) => RuleKind::Weak,
        }
    }

    pub fn is_weak(&self) -> bool {
        matches!(self.head, Head::Weak(_))
    }

    /// Number of literals, the measure minimised by the learner. A choice
    /// head counts one per element and a weak tail counts nothing.
    pub fn literal_count(&self) -> usize {
        let head = match &self.head {
            Head::Atom(_) => 1,
            Head::Constraint | Head::Weak(_) => 0,
            Head::Choice(c) => c.elements.len(),
        };
        head + self.body.len()
    }

    pub fn head_atoms(&self) -> &[Atom] {
        match &self.head {
            Head::Atom(a) => std::slice::from_ref(a),
            Head::Choice(c) => &c.elements,
            Head::Constraint | Head::Weak(_) => &[],
        }
    }

    /// Every atom of the rule, head first, then body.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head_atoms()
            .iter()
            .chain(self.body.iter().filter_map(Literal::atom))
    }

    pub fn positive_vars(&self) -> BTreeSet<Symbol> {
        let mut vars = BTreeSet::new();
        for lit in &self.body {
            if let Literal::Pos(a) = lit {
                a.collect_vars(&mut vars);
            }
        }
        vars
    }

    /// Checks that every variable occurs in a positive body literal.
    pub fn check_safety(&self) -> Result<()> {
        let bound = self.positive_vars();
        let mut needed = BTreeSet::new();
        for a in self.head_atoms() {
            a.collect_vars(&mut needed);
        }
        if let Head::Weak(tail) = &self.head {
            tail.weight.collect_vars(&mut needed);
            tail.level.collect_vars(&mut needed);
            tail.terms.iter().for_each(|t| t.collect_vars(&mut needed));
        }
        for lit in &self.body {
            match lit {
                Literal::Pos(_) => {}
                Literal::Neg(a) => a.collect_vars(&mut needed),
                Literal::Cmp(l, _, r) => {
                    l.collect_vars(&mut needed);
                    r.collect_vars(&mut needed);
                }
            }
        }
        match needed.difference(&bound).next() {
            Some(var) => Err(Error::UnsafeRule {
                rule: self.to_string(),
                var: var.to_string(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Head::Atom(a) => write!(f, "{a}")?,
            Head::Constraint => {}
            Head::Choice(c) => {
                if c.lower != 0 {
                    write!(f, "{} ", c.lower)?;
                }
                f.write_str("{ ")?;
                write_joined(f, &c.elements, "; ")?;
                f.write_str(" }")?;
                if let Some(u) = c.upper {
                    write!(f, " {u}")?;
                }
            }
            Head::Weak(_) => f.write_str(":~ ")?,
        }
        match &self.head {
            Head::Weak(tail) => {
                write_joined(f, &self.body, ", ")?;
                write!(f, ". [{}@{}", tail.weight, tail.level)?;
                for t in &tail.terms {
                    write!(f, ", {t}")?;
                }
                f.write_str("]")
            }
            Head::Constraint => {
                f.write_str(":- ")?;
                write_joined(f, &self.body, ", ")?;
                f.write_str(".")
            }
            _ => {
                if !self.body.is_empty() {
                    f.write_str(" :- ")?;
                    write_joined(f, &self.body, ", ")?;
                }
                f.write_str(".")
            }
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let program = parse_program(s)?;
        match <[Rule; 1]>::try_from(program.rules) {
            Ok([rule]) => Ok(rule),
            Err(rules) => Err(ParseError::new(1, 1, format!("expected one rule, found {}", rules.len())).into()),
        }
    }
}

/// An ordered list of rules. Order is preserved by every transformation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn facts<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Self {
        Program {
            rules: atoms.into_iter().cloned().map(Rule::fact).collect(),
        }
    }

    pub fn extend(&mut self, other: &Program) {
        self.rules.extend(other.rules.iter().cloned());
    }

    pub fn union(&self, other: &Program) -> Program {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn has_weak_constraints(&self) -> bool {
        self.rules.iter().any(Rule::is_weak)
    }

    pub fn without_weak_constraints(&self) -> Program {
        Program {
            rules: self.rules.iter().filter(|r| !r.is_weak()).cloned().collect(),
        }
    }

    /// Predicate names (any arity) used by atoms of the program.
    pub fn predicates(&self) -> BTreeSet<Symbol> {
        self.rules
            .iter()
            .flat_map(Rule::atoms)
            .map(|a| a.predicate.clone())
            .collect()
    }

    pub fn uses_predicate(&self, name: &str) -> bool {
        self.rules.iter().flat_map(Rule::atoms).any(|a| &*a.predicate == name)
    }

    /// Rejects a predicate used with two different arities.
    pub fn check_arities(&self) -> Result<()> {
        let mut seen: BTreeMap<Symbol, usize> = BTreeMap::new();
        for atom in self.rules.iter().flat_map(Rule::atoms) {
            match seen.get(&atom.predicate) {
                Some(&arity) if arity != atom.arity() => {
                    return Err(Error::ArityClash {
                        predicate: atom.predicate.to_string(),
                        first: arity,
                        second: atom.arity(),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(atom.predicate.clone(), atom.arity());
                }
            }
        }
        Ok(())
    }

    pub fn literal_count(&self) -> usize {
        self.rules.iter().map(Rule::literal_count).sum()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_program(s)
    }
}

impl FromIterator<Rule> for Program {
    fn from_iter<I: IntoIterator<Item = Rule>>(iter: I) -> Self {
        Program {
            rules: iter.into_iter().collect(),
        }
    }
}
