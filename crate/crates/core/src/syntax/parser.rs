//! Text format for knowledge bases.
//!
//! ```text
//! % Example: spouses
//! Wife(anna).
//! Wife(X), Married(X,Y) -> Husband(Y).
//! Wife(Y) -> exists X. Husband(X), Married(X,Y).
//! Husband(X), Wife(X) -> false.
//! ```
//!
//! Relation names are identifiers in functor position. Arguments starting
//! with a lowercase letter are constants, uppercase ones are variables.

use std::collections::{BTreeMap, BTreeSet};

use super::{Atom, ExistentialRule, KnowledgeBase, NegativeConstraint, RuleError, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("relation {relation} used with arity {seen}, expected {expected}")]
    ArityMismatch { relation: String, seen: usize, expected: usize },
    #[error("line {line}: variable {variable} occurs only in the head and is not existentially quantified")]
    VariableOnlyInHeadWithoutExists { variable: String, line: usize },
    #[error("line {line}: {source}")]
    InvalidRule { line: usize, source: RuleError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let simple = |tok| Spanned { tok, line: line_no, col };
            match c {
                '%' => break,
                c if c.is_whitespace() => i += 1,
                '(' => {
                    out.push(simple(Tok::LParen));
                    i += 1;
                }
                ')' => {
                    out.push(simple(Tok::RParen));
                    i += 1;
                }
                ',' => {
                    out.push(simple(Tok::Comma));
                    i += 1;
                }
                '.' => {
                    out.push(simple(Tok::Dot));
                    i += 1;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    out.push(simple(Tok::Arrow));
                    i += 2;
                }
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let ident: String = chars[start..i].iter().collect();
                    out.push(Spanned { tok: Tok::Ident(ident), line: line_no, col });
                }
                other => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        col,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.eof)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.ident("a term")?;
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            Ok(Term::Variable(name))
        } else {
            Ok(Term::Constant(name))
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let relation = self.ident("a relation name")?;
        self.expect(Tok::LParen, "'(' after relation name")?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(Atom { relation, args })
    }

    fn conj(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut atoms = vec![self.atom()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            atoms.push(self.atom()?);
        }
        Ok(atoms)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) && self.peek_at(1) != Some(&Tok::LParen)
    }
}

enum Statement {
    Fact(Atom),
    Rule(ExistentialRule),
    Constraint(NegativeConstraint),
}

fn statement(p: &mut Parser) -> Result<Statement, ParseError> {
    let line = p.here().0;
    let body = p.conj()?;
    match p.peek() {
        Some(Tok::Dot) => {
            if body.len() != 1 {
                return p.err("a fact is a single atom; expected '->'");
            }
            let atom = body.into_iter().next().unwrap();
            if !atom.is_ground() {
                return p.err(format!("fact {atom} must not contain variables"));
            }
            p.pos += 1;
            Ok(Statement::Fact(atom))
        }
        Some(Tok::Arrow) => {
            p.pos += 1;
            if p.is_keyword("false") {
                p.pos += 1;
                p.expect(Tok::Dot, "'.' after false")?;
                let c = NegativeConstraint::new(body).map_err(|source| ParseError::InvalidRule { line, source })?;
                return Ok(Statement::Constraint(c));
            }
            let mut evars = BTreeSet::new();
            if p.is_keyword("exists") {
                p.pos += 1;
                loop {
                    let v = p.ident("an existential variable")?;
                    if !v.starts_with(|c: char| c.is_ascii_uppercase()) {
                        p.pos -= 1;
                        return p.err("existential variables must start with an uppercase letter");
                    }
                    evars.insert(v);
                    if p.peek() == Some(&Tok::Comma) {
                        p.pos += 1;
                    } else {
                        break;
                    }
                }
                p.expect(Tok::Dot, "'.' after the existential variables")?;
            }
            if p.peek().is_none() || p.peek() == Some(&Tok::Dot) {
                return p.err("missing rule head");
            }
            let head = p.conj()?;
            p.expect(Tok::Dot, "'.' at end of rule")?;
            let rule = ExistentialRule::new(body, head, evars).map_err(|source| match source {
                RuleError::VariableOnlyInHeadWithoutExists(variable) => {
                    ParseError::VariableOnlyInHeadWithoutExists { variable, line }
                }
                source => ParseError::InvalidRule { line, source },
            })?;
            Ok(Statement::Rule(rule))
        }
        _ => p.err("expected '.' or '->'"),
    }
}

/// Parses a whole program. Arities are checked across rules, constraints
/// and facts; the first occurrence of a relation fixes its arity.
pub fn parse_program(text: &str) -> Result<KnowledgeBase, ParseError> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), text.lines().last().map_or(1, |l| l.chars().count() + 1));
    let mut p = Parser { toks, pos: 0, eof };
    let mut kb = KnowledgeBase::default();
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    let mut check = |atoms: &[Atom]| -> Result<(), ParseError> {
        for a in atoms {
            let expected = *arities.entry(a.relation.clone()).or_insert(a.arity());
            if expected != a.arity() {
                return Err(ParseError::ArityMismatch { relation: a.relation.clone(), seen: a.arity(), expected });
            }
        }
        Ok(())
    };
    while p.peek().is_some() {
        match statement(&mut p)? {
            Statement::Fact(a) => {
                check(std::slice::from_ref(&a))?;
                kb.database.insert(a);
            }
            Statement::Rule(r) => {
                check(&r.body)?;
                check(&r.head)?;
                kb.ontology.rules.push(r);
            }
            Statement::Constraint(c) => {
                check(&c.body)?;
                kb.ontology.constraints.push(c);
            }
        }
    }
    Ok(kb)
}

/// Renders a knowledge base in the text format: rules, then constraints,
/// then facts in canonical order.
pub fn render_program(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for r in &kb.ontology.rules {
        out.push_str(&format!("{r}.\n"));
    }
    for c in &kb.ontology.constraints {
        out.push_str(&format!("{c}.\n"));
    }
    for f in &kb.database {
        out.push_str(&format!("{f}.\n"));
    }
    out
}
