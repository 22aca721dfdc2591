//! Textual task documents.
//!
//! ```text
//! #background { coin(1..2). }
//! #hypothesis {
//!   go_out :- not raining.
//!   go_out.
//! }
//! #pos(e1, {go_out}, {}, {}).
//! #pos(e2, {}, {go_out}, { raining. }).
//! #neg(e3, {go_out}, {}).
//! #brave_ordering(e1, e2).
//! #brave_equality(e1, e2).
//! #cautious_ordering(e1, e2).
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::solve::PartialInterpretation;
use crate::syntax::{Atom, ParseError, Parser, Program, Rule, TokenKind};
use crate::task::{Cdoe, Cdpi, LearningTask, Mode, Relation};

pub fn load_task(path: impl AsRef<Path>) -> Result<LearningTask> {
    parse_task(&std::fs::read_to_string(path)?)
}

pub fn save_task(t: &LearningTask, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(t))?;
    Ok(())
}

/// Parses a task document and enforces every task invariant.
pub fn parse_task(text: &str) -> Result<LearningTask> {
    let mut p = Parser::new(text)?;
    let mut t = LearningTask::default();
    while !p.at_eof() {
        let name = match p.peek_kind().clone() {
            TokenKind::Directive(name) => name,
            other => return Err(p.error_here(format!("expected a directive, found {other}")).into()),
        };
        p.bump();
        match name.as_str() {
            "background" => t.background.rules.extend(rule_block(&mut p)?),
            "hypothesis" => t.hypothesis_space.extend(rule_block(&mut p)?),
            "pos" => t.positives.push(cdpi(&mut p)?),
            "neg" => t.negatives.push(cdpi(&mut p)?),
            "brave_ordering" | "brave_equality" | "cautious_ordering" => {
                p.expect(&TokenKind::LParen)?;
                let first = p.parse_term()?.to_string();
                p.expect(&TokenKind::Comma)?;
                let second = p.parse_term()?.to_string();
                p.expect(&TokenKind::RParen)?;
                let (relation, mode) = match name.as_str() {
                    "brave_ordering" => (Relation::Strict, Mode::Brave),
                    "brave_equality" => (Relation::Equal, Mode::Brave),
                    _ => (Relation::Strict, Mode::Cautious),
                };
                t.add_ordering(&first, &second, relation, mode);
            }
            other => return Err(p.error_here(format!("unknown directive `#{other}`")).into()),
        }
        p.eat(&TokenKind::Dot);
    }
    check_rules(&t)?;
    t.validate()?;
    Ok(t)
}

fn rule_block(p: &mut Parser) -> Result<Vec<Rule>, ParseError> {
    p.expect(&TokenKind::LBrace)?;
    let rules = p.parse_rules_until(&TokenKind::RBrace)?;
    p.expect(&TokenKind::RBrace)?;
    Ok(rules)
}

fn atom_set(p: &mut Parser) -> Result<Vec<Atom>, ParseError> {
    p.expect(&TokenKind::LBrace)?;
    let mut atoms = Vec::new();
    if !p.eat(&TokenKind::RBrace) {
        loop {
            let tok = p.peek().clone();
            let atom = p.parse_atom()?;
            if !atom.is_ground() {
                return Err(ParseError::new(tok.line, tok.column, format!("example atom `{atom}` is not ground")));
            }
            atoms.push(atom);
            if !p.eat(&TokenKind::Comma) {
                break;
            }
        }
        p.expect(&TokenKind::RBrace)?;
    }
    Ok(atoms)
}

fn cdpi(p: &mut Parser) -> Result<Cdpi, ParseError> {
    p.expect(&TokenKind::LParen)?;
    let id = p.parse_term()?.to_string();
    p.expect(&TokenKind::Comma)?;
    let inc = atom_set(p)?;
    p.expect(&TokenKind::Comma)?;
    let exc = atom_set(p)?;
    let context = if p.eat(&TokenKind::Comma) {
        Program::new(rule_block(p)?)
    } else {
        Program::default()
    };
    p.expect(&TokenKind::RParen)?;
    Ok(Cdpi::new(&id, PartialInterpretation::new(inc, exc), context))
}

/// Arity consistency across the whole document and safety of every rule.
fn check_rules(t: &LearningTask) -> Result<()> {
    let mut all = t.background.clone();
    all.rules.extend(t.hypothesis_space.iter().cloned());
    for ex in t.positives.iter().chain(&t.negatives) {
        all.extend(&ex.context);
        all.extend(&Program::facts(ex.example.inc.iter().chain(&ex.example.exc)));
    }
    all.check_arities()?;
    for rule in &all.rules {
        rule.check_safety()?;
    }
    Ok(())
}

fn write_atoms(out: &mut String, atoms: &std::collections::BTreeSet<Atom>) {
    out.push('{');
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{a}");
    }
    out.push('}');
}

fn write_block(out: &mut String, name: &str, rules: &[Rule]) {
    let _ = writeln!(out, "#{name} {{");
    for r in rules {
        let _ = writeln!(out, "  {r}");
    }
    out.push_str("}\n");
}

fn write_cdpi(out: &mut String, name: &str, ex: &Cdpi) {
    let _ = write!(out, "#{name}({}, ", ex.id);
    write_atoms(out, &ex.example.inc);
    out.push_str(", ");
    write_atoms(out, &ex.example.exc);
    out.push_str(", {");
    for r in &ex.context.rules {
        let _ = write!(out, " {r}");
    }
    out.push_str(" }).\n");
}

fn write_ordering(out: &mut String, name: &str, o: &Cdoe) {
    let _ = writeln!(out, "#{name}({}, {}).", o.first, o.second);
}

/// Renders a task document that parses back to an equal task.
pub fn to_text(t: &LearningTask) -> String {
    let mut out = String::new();
    write_block(&mut out, "background", &t.background.rules);
    write_block(&mut out, "hypothesis", &t.hypothesis_space);
    for ex in &t.positives {
        write_cdpi(&mut out, "pos", ex);
    }
    for ex in &t.negatives {
        write_cdpi(&mut out, "neg", ex);
    }
    for o in &t.brave_orderings {
        let name = match o.relation {
            Relation::Strict => "brave_ordering",
            Relation::Equal => "brave_equality",
        };
        write_ordering(&mut out, name, o);
    }
    for o in &t.cautious_orderings {
        write_ordering(&mut out, "cautious_ordering", o);
    }
    out
}
