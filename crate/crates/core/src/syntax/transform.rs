use super::{Atom, Choice, Head, Literal, Program, Rule};
use crate::error::{Error, Result};

/// Adds `a` as the last positive literal of every rule, weak constraints
/// included.
pub fn append_body(p: &Program, a: &Atom) -> Program {
    p.rules
        .iter()
        .map(|rule| {
            let mut rule = rule.clone();
            rule.body.push(Literal::Pos(a.clone()));
            rule
        })
        .collect()
}

pub(crate) fn wrap(atom: &Atom, wrapper: &str) -> Atom {
    Atom::new(wrapper, vec![atom.to_term()])
}

fn wrap_literal(lit: &Literal, wrapper: &str) -> Literal {
    match lit {
        Literal::Pos(a) => Literal::Pos(wrap(a, wrapper)),
        Literal::Neg(a) => Literal::Neg(wrap(a, wrapper)),
        Literal::Cmp(..) => lit.clone(),
    }
}

pub(crate) fn wrap_body(body: &[Literal], wrapper: &str) -> Vec<Literal> {
    body.iter().map(|l| wrap_literal(l, wrapper)).collect()
}

/// Drops weak constraints and replaces every atom `a` by `wrapper(a)`.
pub fn reify(p: &Program, wrapper: &str) -> Result<Program> {
    if p.uses_predicate(wrapper) {
        return Err(Error::NameClash(wrapper.to_string()));
    }
    Ok(p.rules
        .iter()
        .filter(|r| !r.is_weak())
        .map(|rule| {
            let head = match &rule.head {
                Head::Atom(a) => Head::Atom(wrap(a, wrapper)),
                Head::Constraint => Head::Constraint,
                Head::Choice(c) => Head::Choice(Choice {
                    lower: c.lower,
                    upper: c.upper,
                    elements: c.elements.iter().map(|a| wrap(a, wrapper)).collect(),
                }),
                Head::Weak(_) => unreachable!("weak constraints are filtered out"),
            };
            Rule {
                head,
                body: wrap_body(&rule.body, wrapper),
            }
        })
        .collect())
}
