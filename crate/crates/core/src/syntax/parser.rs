use std::fmt;

use thiserror::Error;

use super::{sym, Atom, Choice, CmpOp, Head, Literal, Program, Rule, Term, WeakTail};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Var(String),
    Int(i64),
    /// `#name`
    Directive(String),
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    DotDot,
    If,
    WeakIf,
    At,
    Minus,
    Cmp(CmpOp),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) | TokenKind::Var(s) => write!(f, "`{s}`"),
            TokenKind::Int(v) => write!(f, "`{v}`"),
            TokenKind::Directive(s) => write!(f, "`#{s}`"),
            TokenKind::Not => f.write_str("`not`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Dot => f.write_str("`.`"),
            TokenKind::DotDot => f.write_str("`..`"),
            TokenKind::If => f.write_str("`:-`"),
            TokenKind::WeakIf => f.write_str("`:~`"),
            TokenKind::At => f.write_str("`@`"),
            TokenKind::Minus => f.write_str("`-`"),
            TokenKind::Cmp(op) => write!(f, "`{}`", op.as_str()),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (kind, len) = match c {
            '(' => (TokenKind::LParen, 1),
            ')' => (TokenKind::RParen, 1),
            '{' => (TokenKind::LBrace, 1),
            '}' => (TokenKind::RBrace, 1),
            '[' => (TokenKind::LBracket, 1),
            ']' => (TokenKind::RBracket, 1),
            ',' => (TokenKind::Comma, 1),
            ';' => (TokenKind::Semi, 1),
            '@' => (TokenKind::At, 1),
            '-' => (TokenKind::Minus, 1),
            '.' if next == Some('.') => (TokenKind::DotDot, 2),
            '.' => (TokenKind::Dot, 1),
            ':' if next == Some('-') => (TokenKind::If, 2),
            ':' if next == Some('~') => (TokenKind::WeakIf, 2),
            '<' if next == Some('=') => (TokenKind::Cmp(CmpOp::Le), 2),
            '>' if next == Some('=') => (TokenKind::Cmp(CmpOp::Ge), 2),
            '!' if next == Some('=') => (TokenKind::Cmp(CmpOp::Ne), 2),
            '=' if next == Some('=') => (TokenKind::Cmp(CmpOp::Eq), 2),
            '<' => (TokenKind::Cmp(CmpOp::Lt), 1),
            '>' => (TokenKind::Cmp(CmpOp::Gt), 1),
            '=' => (TokenKind::Cmp(CmpOp::Eq), 1),
            '#' | '_' | 'a'..='z' | 'A'..='Z' => {
                let body_start = if c == '#' { i + 1 } else { i };
                let mut j = body_start;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[body_start..j].iter().collect();
                let kind = if c == '#' {
                    if word.is_empty() {
                        return Err(ParseError::new(line, col, "expected directive name after `#`"));
                    }
                    TokenKind::Directive(word)
                } else if word == "not" {
                    TokenKind::Not
                } else if c.is_ascii_lowercase() {
                    TokenKind::Ident(word)
                } else {
                    TokenKind::Var(word)
                };
                (kind, j - i)
            }
            '0'..='9' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[i..j].iter().collect();
                let value = digits
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(line, col, format!("integer `{digits}` out of range")))?;
                (TokenKind::Int(value), j - i)
            }
            other => return Err(ParseError::new(line, col, format!("unexpected character `{other}`"))),
        };
        advance(len, &mut i, &mut col);
        tokens.push(Token {
            kind,
            line: start.0,
            column: start.1,
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        column: col,
    });
    Ok(tokens)
}

/// Recursive-descent parser over a token stream. Also used by the task file
/// reader for rule blocks inside directives.
pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek_kind(), TokenKind::Eof)
    }

    pub fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if !matches!(tok.kind, TokenKind::Eof) {
            self.pos += 1;
        }
        tok
    }

    pub fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error_here(&self, message: impl Into<String>) -> ParseError {
        let tok = self.peek();
        ParseError::new(tok.line, tok.column, message)
    }

    pub fn expect(&mut self, kind: &TokenKind) -> Result<Token, ParseError> {
        if self.peek_kind() == kind {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {kind}, found {}", self.peek_kind())))
        }
    }

    /// Parses rules until `stop` (not consumed) or end of input.
    pub fn parse_rules_until(&mut self, stop: &TokenKind) -> Result<Vec<Rule>, ParseError> {
        let mut rules = Vec::new();
        while self.peek_kind() != stop && !self.at_eof() {
            rules.push(self.parse_rule()?);
        }
        Ok(rules)
    }

    pub fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        match self.peek_kind().clone() {
            TokenKind::If => {
                self.bump();
                let body = self.parse_body()?;
                self.expect_terminator()?;
                Ok(Rule::constraint(body))
            }
            TokenKind::WeakIf => {
                self.bump();
                let body = self.parse_body()?;
                self.expect_terminator()?;
                if !matches!(self.peek_kind(), TokenKind::LBracket) {
                    return Err(self.error_here("weak constraint missing tail `[weight@level, ...]`"));
                }
                let tail = self.parse_weak_tail()?;
                Ok(Rule {
                    head: Head::Weak(tail),
                    body,
                })
            }
            TokenKind::Int(_) | TokenKind::LBrace => {
                let choice = self.parse_choice()?;
                let body = self.parse_optional_body()?;
                self.expect_terminator()?;
                Ok(Rule {
                    head: Head::Choice(choice),
                    body,
                })
            }
            TokenKind::Ident(_) => {
                let head = self.parse_atom()?;
                let body = self.parse_optional_body()?;
                for lit in &body {
                    if lit.atom().is_some_and(|a| a.args.iter().any(Term::has_range))
                        || matches!(lit, Literal::Cmp(l, _, r) if l.has_range() || r.has_range())
                    {
                        return Err(self.error_here("range terms are not allowed in rule bodies"));
                    }
                }
                self.expect_terminator()?;
                Ok(Rule::normal(head, body))
            }
            other => Err(self.error_here(format!("expected a rule, found {other}"))),
        }
    }

    fn expect_terminator(&mut self) -> Result<(), ParseError> {
        if self.eat(&TokenKind::Dot) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected `.` to end the rule, found {}", self.peek_kind())))
        }
    }

    fn parse_optional_body(&mut self) -> Result<Vec<Literal>, ParseError> {
        if self.eat(&TokenKind::If) {
            self.parse_body()
        } else {
            Ok(Vec::new())
        }
    }

    fn parse_body(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut body = vec![self.parse_literal()?];
        while self.eat(&TokenKind::Comma) {
            body.push(self.parse_literal()?);
        }
        if body.iter().any(|lit| match lit {
            Literal::Pos(a) | Literal::Neg(a) => a.args.iter().any(Term::has_range),
            Literal::Cmp(l, _, r) => l.has_range() || r.has_range(),
        }) {
            return Err(self.error_here("range terms are not allowed in rule bodies"));
        }
        Ok(body)
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        if self.eat(&TokenKind::Not) {
            return Ok(Literal::Neg(self.parse_atom()?));
        }
        let (line, column) = (self.peek().line, self.peek().column);
        let lhs = self.parse_term()?;
        if let TokenKind::Cmp(op) = *self.peek_kind() {
            self.bump();
            let rhs = self.parse_term()?;
            return Ok(Literal::Cmp(lhs, op, rhs));
        }
        lhs.to_atom()
            .map(Literal::Pos)
            .ok_or_else(|| ParseError::new(line, column, format!("`{lhs}` is not an atom")))
    }

    fn parse_choice(&mut self) -> Result<Choice, ParseError> {
        let lower = match *self.peek_kind() {
            TokenKind::Int(v) => {
                self.bump();
                v
            }
            _ => 0,
        };
        self.expect(&TokenKind::LBrace)?;
        let mut elements = vec![self.parse_atom()?];
        while self.eat(&TokenKind::Comma) || self.eat(&TokenKind::Semi) {
            elements.push(self.parse_atom()?);
        }
        self.expect(&TokenKind::RBrace)?;
        let upper = match *self.peek_kind() {
            TokenKind::Int(v) => {
                self.bump();
                Some(v)
            }
            _ => None,
        };
        if upper.is_some_and(|u| u < lower) {
            return Err(self.error_here("choice upper bound below lower bound"));
        }
        Ok(Choice {
            lower,
            upper,
            elements,
        })
    }

    fn parse_weak_tail(&mut self) -> Result<WeakTail, ParseError> {
        self.expect(&TokenKind::LBracket)?;
        let weight = self.parse_term()?;
        let level = if self.eat(&TokenKind::At) {
            self.parse_term()?
        } else {
            Term::Int(0)
        };
        let mut terms = Vec::new();
        while self.eat(&TokenKind::Comma) {
            terms.push(self.parse_term()?);
        }
        self.expect(&TokenKind::RBracket)?;
        Ok(WeakTail { weight, level, terms })
    }

    pub fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let (line, column) = (self.peek().line, self.peek().column);
        let term = self.parse_term()?;
        term.to_atom()
            .ok_or_else(|| ParseError::new(line, column, format!("expected an atom, found `{term}`")))
    }

    pub fn parse_standalone_atom(&mut self) -> Result<Atom, ParseError> {
        let atom = self.parse_atom()?;
        if !self.at_eof() {
            return Err(self.error_here(format!("unexpected {} after atom", self.peek_kind())));
        }
        Ok(atom)
    }

    pub fn parse_term(&mut self) -> Result<Term, ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Minus => match self.bump().kind {
                TokenKind::Int(v) => self.maybe_range(-v),
                other => Err(ParseError::new(tok.line, tok.column, format!("expected integer after `-`, found {other}"))),
            },
            TokenKind::Int(v) => self.maybe_range(v),
            TokenKind::Var(name) => Ok(Term::Var(sym(&name))),
            TokenKind::Ident(name) => {
                if self.eat(&TokenKind::LParen) {
                    let mut args = vec![self.parse_term()?];
                    while self.eat(&TokenKind::Comma) {
                        args.push(self.parse_term()?);
                    }
                    self.expect(&TokenKind::RParen)?;
                    Ok(Term::Func(sym(&name), args))
                } else {
                    Ok(Term::Sym(sym(&name)))
                }
            }
            other => Err(ParseError::new(tok.line, tok.column, format!("expected a term, found {other}"))),
        }
    }

    fn maybe_range(&mut self, lo: i64) -> Result<Term, ParseError> {
        if !self.eat(&TokenKind::DotDot) {
            return Ok(Term::Int(lo));
        }
        let negative = self.eat(&TokenKind::Minus);
        match self.bump().kind {
            TokenKind::Int(v) => {
                let hi = if negative { -v } else { v };
                if lo > hi {
                    return Err(self.error_here(format!("empty range {lo}..{hi}")));
                }
                Ok(Term::Range(lo, hi))
            }
            other => Err(self.error_here(format!("expected range upper bound, found {other}"))),
        }
    }
}

/// Parses a program, then checks predicate arities and rule safety.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut parser = Parser::new(text)?;
    let rules = parser.parse_rules_until(&TokenKind::Eof)?;
    let program = Program::new(rules);
    program.check_arities()?;
    for rule in &program.rules {
        rule.check_safety()?;
    }
    Ok(program)
}
