//! Clause intermediate representation and its Prolog-style text form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::DatalogError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    /// A symbol constant, resolved against the database at evaluation time.
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

fn is_bare_atom(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) if is_bare_atom(c) => f.write_str(c),
            Term::Const(c) => {
                f.write_str("'")?;
                for ch in c.chars() {
                    match ch {
                        '\'' => f.write_str("\\'")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        ch => write!(f, "{ch}")?,
                    }
                }
                f.write_str("'")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

/// One body element. Order is preserved as written so the dump reproduces
/// the source clause; evaluation treats constraints as filters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyItem {
    Literal(Literal),
    Neq(Term, Term),
}

impl BodyItem {
    pub fn pos(atom: Atom) -> Self {
        BodyItem::Literal(Literal {
            atom,
            negated: false,
        })
    }

    pub fn neg(atom: Atom) -> Self {
        BodyItem::Literal(Literal {
            atom,
            negated: true,
        })
    }
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Literal(l) if l.negated => write!(f, "\\+ {}", l.atom),
            BodyItem::Literal(l) => write!(f, "{}", l.atom),
            BodyItem::Neq(a, b) => write!(f, "{a} \\= {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<BodyItem>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<BodyItem>) -> Self {
        Clause { head, body }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Literal(l) => Some(l),
            BodyItem::Neq(..) => None,
        })
    }

    pub fn positive(&self) -> impl Iterator<Item = &Atom> {
        self.literals().filter(|l| !l.negated).map(|l| &l.atom)
    }

    pub fn negative(&self) -> impl Iterator<Item = &Atom> {
        self.literals().filter(|l| l.negated).map(|l| &l.atom)
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Neq(x, y) => Some((x, y)),
            BodyItem::Literal(_) => None,
        })
    }

    /// Renames variables by order of first appearance (`V0`, `V1`, ...), so
    /// alpha-equivalent clauses compare equal.
    pub fn canonical(&self) -> Clause {
        let mut names: BTreeMap<String, String> = BTreeMap::new();
        let mut rename = |t: &Term| match t {
            Term::Var(v) => {
                let next = format!("V{}", names.len());
                Term::Var(names.entry(v.clone()).or_insert(next).clone())
            }
            c => c.clone(),
        };
        let head = Atom::new(
            self.head.pred.clone(),
            self.head.args.iter().map(&mut rename).collect(),
        );
        let mut body = Vec::with_capacity(self.body.len());
        for b in &self.body {
            body.push(match b {
                BodyItem::Literal(l) => BodyItem::Literal(Literal {
                    atom: Atom::new(l.atom.pred.clone(), l.atom.args.iter().map(&mut rename).collect()),
                    negated: l.negated,
                }),
                BodyItem::Neq(x, y) => {
                    let x = rename(x);
                    BodyItem::Neq(x, rename(y))
                }
            });
        }
        Clause { head, body }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

/// A set of clauses with consistent predicate arities. Predicates that
/// appear in some head are derived; all others are base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    derived: BTreeMap<String, usize>,
    base: BTreeMap<String, usize>,
    queries: BTreeSet<String>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Program, DatalogError> {
        let mut p = Program::default();
        for c in clauses {
            p.push(c)?;
        }
        Ok(p)
    }

    /// Adds a clause, checking arity consistency and head well-formedness.
    pub fn push(&mut self, clause: Clause) -> Result<(), DatalogError> {
        if clause.head.args.iter().any(|t| matches!(t, Term::Const(_))) {
            return Err(DatalogError::ConstantInHead {
                clause: clause.to_string(),
            });
        }
        let arity_of = |name: &str, p: &Program| {
            p.derived.get(name).or(p.base.get(name)).copied()
        };
        let mut uses = vec![(&clause.head, true)];
        uses.extend(clause.literals().map(|l| (&l.atom, false)));
        for (atom, _) in &uses {
            if let Some(existing) = arity_of(&atom.pred, self) {
                if existing != atom.args.len() {
                    return Err(DatalogError::ArityConflict {
                        pred: atom.pred.clone(),
                        expected: existing,
                        found: atom.args.len(),
                    });
                }
            }
        }
        // a body literal may have introduced the head name as base earlier
        let head = &clause.head.pred;
        if let Some(arity) = self.base.remove(head) {
            self.derived.insert(head.clone(), arity);
        }
        self.derived
            .entry(head.clone())
            .or_insert(clause.head.args.len());
        for l in clause.literals() {
            let name = &l.atom.pred;
            if !self.derived.contains_key(name) {
                self.base.entry(name.clone()).or_insert(l.atom.args.len());
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Appends every clause of `other`, keeping query marks.
    pub fn extend(&mut self, other: Program) -> Result<(), DatalogError> {
        for c in other.clauses {
            self.push(c)?;
        }
        self.queries.extend(other.queries);
        Ok(())
    }

    /// Marks a derived predicate as a query (a rule's violation predicate).
    /// Queries are evaluated in strata above every non-query predicate.
    pub fn mark_query(&mut self, pred: &str) {
        self.queries.insert(pred.to_owned());
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn derived(&self) -> &BTreeMap<String, usize> {
        &self.derived
    }

    pub fn base(&self) -> &BTreeMap<String, usize> {
        &self.base
    }

    pub fn queries(&self) -> &BTreeSet<String> {
        &self.queries
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.derived.get(pred).or(self.base.get(pred)).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct IrParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum IrTok {
    Lower(String),
    Upper(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Not,
    Neq,
}

fn lex_ir(text: &str) -> Result<Vec<(IrTok, u32, u32)>, IrParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let err = |m: &str| IrParseError {
            line: l,
            col: k,
            message: m.to_owned(),
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            if c.is_ascii_lowercase() {
                IrTok::Lower(s)
            } else {
                IrTok::Upper(s)
            }
        } else if c == '\'' {
            bump!();
            let mut s = String::new();
            loop {
                match bump!() {
                    None => return Err(err("unterminated quoted atom")),
                    Some('\'') => break,
                    Some('\\') => match bump!() {
                        Some('n') => s.push('\n'),
                        Some(e @ ('\'' | '\\')) => s.push(e),
                        _ => return Err(err("invalid escape")),
                    },
                    Some(o) => s.push(o),
                }
            }
            IrTok::Quoted(s)
        } else {
            bump!();
            match c {
                '(' => IrTok::LParen,
                ')' => IrTok::RParen,
                ',' => IrTok::Comma,
                '.' => IrTok::Dot,
                ':' if chars.peek() == Some(&'-') => {
                    bump!();
                    IrTok::Neck
                }
                '\\' if chars.peek() == Some(&'+') => {
                    bump!();
                    IrTok::Not
                }
                '\\' if chars.peek() == Some(&'=') => {
                    bump!();
                    IrTok::Neq
                }
                _ => return Err(err(&format!("unexpected character `{c}`"))),
            }
        };
        out.push((tok, l, k));
    }
    Ok(out)
}

struct IrParser {
    toks: Vec<(IrTok, u32, u32)>,
    pos: usize,
}

impl IrParser {
    fn peek(&self) -> Option<&IrTok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn error(&self, message: &str) -> IrParseError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map(|t| (t.1, t.2))
            .unwrap_or((1, 1));
        IrParseError {
            line,
            col,
            message: message.to_owned(),
        }
    }

    fn eat(&mut self, tok: &IrTok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn term(&mut self) -> Result<Term, IrParseError> {
        let t = match self.peek() {
            Some(IrTok::Upper(v)) => Term::Var(v.clone()),
            Some(IrTok::Lower(c) | IrTok::Quoted(c)) => Term::Const(c.clone()),
            _ => return Err(self.error("expected a term")),
        };
        self.pos += 1;
        Ok(t)
    }

    fn atom(&mut self) -> Result<Atom, IrParseError> {
        let Some(IrTok::Lower(pred)) = self.peek().cloned() else {
            return Err(self.error("expected a predicate name"));
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.eat(&IrTok::LParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&IrTok::RParen) {
                    break;
                }
                if !self.eat(&IrTok::Comma) {
                    return Err(self.error("expected `,` or `)`"));
                }
            }
        }
        Ok(Atom::new(pred, args))
    }

    fn item(&mut self) -> Result<BodyItem, IrParseError> {
        if self.eat(&IrTok::Not) {
            return Ok(BodyItem::neg(self.atom()?));
        }
        let is_atom = matches!(self.peek(), Some(IrTok::Lower(_)))
            && !matches!(self.toks.get(self.pos + 1), Some((IrTok::Neq, ..)));
        if is_atom {
            return Ok(BodyItem::pos(self.atom()?));
        }
        let left = self.term()?;
        if !self.eat(&IrTok::Neq) {
            return Err(self.error("expected `\\=`"));
        }
        Ok(BodyItem::Neq(left, self.term()?))
    }

    fn clause(&mut self) -> Result<Clause, IrParseError> {
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.eat(&IrTok::Neck) {
            loop {
                body.push(self.item()?);
                if !self.eat(&IrTok::Comma) {
                    break;
                }
            }
        }
        if !self.eat(&IrTok::Dot) {
            return Err(self.error("expected `.`"));
        }
        Ok(Clause::new(head, body))
    }
}

/// Parses clauses written in the dump syntax:
/// `head(X,Y) :- p(X,Z), \+ q(Z), X \= Y.`
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, IrParseError> {
    let mut p = IrParser {
        toks: lex_ir(text)?,
        pos: 0,
    };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.clause()?);
    }
    Ok(out)
}
