//! Line-oriented `.facts` text format.
//!
//! ```text
//! % structlint facts v1
//! entity(class,"A","shapes.cpp",3,7).
//! entity(function,"A::f(int)",-,0,0).
//! class("A").
//! function_name("A::f(int)",f).
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{EntityKind, FactBase, FactError, Schema, SourceLoc};

pub const HEADER: &str = "% structlint facts v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ReadError {
    pub line: usize,
    pub kind: ReadErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadErrorKind {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Fact(#[from] FactError),
}

/// Serializes a fact base. Output depends only on content, never on ordinal
/// assignment: entities sorted by kind then name, predicates by name, tuples
/// by their argument names.
pub fn write_fact_file(fb: &FactBase) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');

    let mut entities: Vec<_> = fb
        .entities()
        .filter(|(_, e)| e.kind != EntityKind::Symbol)
        .map(|(_, e)| e)
        .collect();
    entities.sort_by(|a, b| (a.kind.as_str(), &a.name).cmp(&(b.kind.as_str(), &b.name)));
    for e in entities {
        out.push_str("entity(");
        out.push_str(e.kind.as_str());
        out.push(',');
        push_quoted(&mut out, &e.name);
        out.push(',');
        match &e.loc {
            Some(loc) => {
                push_quoted(&mut out, &loc.file);
                let _ = write!(out, ",{},{}", loc.line, loc.column);
            }
            None => out.push_str("-,0,0"),
        }
        out.push_str(").\n");
    }

    for (pred, tuples) in fb.relations() {
        let mut rows: Vec<Vec<(EntityKind, &str)>> = tuples
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&id| (fb.entity(id).kind, fb.name(id)))
                    .collect()
            })
            .collect();
        rows.sort_by(|a, b| {
            a.iter()
                .map(|(_, n)| *n)
                .cmp(b.iter().map(|(_, n)| *n))
        });
        for row in rows {
            out.push_str(pred);
            out.push('(');
            for (i, (kind, name)) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if *kind == EntityKind::Symbol && is_bare_symbol(name) {
                    out.push_str(name);
                } else {
                    push_quoted(&mut out, name);
                }
            }
            out.push_str(").\n");
        }
    }
    out
}

/// One fact in file syntax, without the trailing newline.
pub fn format_fact(fb: &FactBase, pred: &str, tuple: &[super::EntityId]) -> String {
    let mut out = String::from(pred);
    out.push('(');
    for (i, &id) in tuple.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let name = fb.name(id);
        if fb.entity(id).kind == EntityKind::Symbol && is_bare_symbol(name) {
            out.push_str(name);
        } else {
            push_quoted(&mut out, name);
        }
    }
    out.push_str(").");
    out
}

fn is_bare_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn push_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
}

#[derive(Debug, PartialEq)]
enum Arg {
    Quoted(String),
    Bare(String),
    Int(u32),
    Dash,
}

struct LineParser<'a> {
    rest: &'a str,
}

impl<'a> LineParser<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn eat(&mut self, c: char) -> Result<(), String> {
        self.skip_ws();
        match self.rest.strip_prefix(c) {
            Some(r) => {
                self.rest = r;
                Ok(())
            }
            None => Err(format!("expected `{c}`")),
        }
    }

    fn ident(&mut self) -> Result<&'a str, String> {
        self.skip_ws();
        let end = self
            .rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest.len());
        if end == 0 || !self.rest.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err("expected a lowercase identifier".into());
        }
        let (id, rest) = self.rest.split_at(end);
        self.rest = rest;
        Ok(id)
    }

    fn arg(&mut self) -> Result<Arg, String> {
        self.skip_ws();
        let mut chars = self.rest.char_indices();
        match chars.next() {
            Some((_, '"')) => {
                let mut s = String::new();
                let mut escaped = false;
                for (i, c) in chars {
                    if escaped {
                        s.push(match c {
                            'n' => '\n',
                            '"' | '\\' => c,
                            _ => return Err(format!("invalid escape `\\{c}`")),
                        });
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else if c == '"' {
                        self.rest = &self.rest[i + 1..];
                        return Ok(Arg::Quoted(s));
                    } else {
                        s.push(c);
                    }
                }
                Err("unterminated string".into())
            }
            Some((_, '-')) => {
                self.rest = &self.rest[1..];
                Ok(Arg::Dash)
            }
            Some((_, c)) if c.is_ascii_digit() => {
                let end = self
                    .rest
                    .find(|c: char| !c.is_ascii_digit())
                    .unwrap_or(self.rest.len());
                let n = self.rest[..end]
                    .parse()
                    .map_err(|_| "integer out of range".to_string())?;
                self.rest = &self.rest[end..];
                Ok(Arg::Int(n))
            }
            Some((_, c)) if c.is_ascii_lowercase() => Ok(Arg::Bare(self.ident()?.to_owned())),
            _ => Err("expected an argument".into()),
        }
    }

    /// `name(arg, ...).` with nothing after the final dot.
    fn statement(&mut self) -> Result<(&'a str, Vec<Arg>), String> {
        let name = self.ident()?;
        self.eat('(')?;
        let mut args = vec![self.arg()?];
        loop {
            self.skip_ws();
            if self.rest.starts_with(')') {
                break;
            }
            self.eat(',')?;
            args.push(self.arg()?);
        }
        self.eat(')')?;
        self.eat('.')?;
        self.skip_ws();
        if !self.rest.is_empty() {
            return Err("trailing characters after `.`".into());
        }
        Ok((name, args))
    }
}

/// Parses a fact file into a fact base. Argument names not declared by an
/// `entity` line are interned with the kind their position requires.
pub fn read_fact_file(text: &str) -> Result<FactBase, ReadError> {
    let mut fb = FactBase::new();
    let schema = Schema::base();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |kind: ReadErrorKind| ReadError { line, kind };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let (name, args) = LineParser { rest: trimmed }
            .statement()
            .map_err(|m| err(ReadErrorKind::Parse(m)))?;

        if name == "entity" {
            let parse = |m: &str| err(ReadErrorKind::Parse(m.to_owned()));
            let [kind, qname, file, l, c]: [Arg; 5] = args
                .try_into()
                .map_err(|_| parse("entity declarations take 5 arguments"))?;
            let kind = match kind {
                Arg::Bare(k) => EntityKind::from_decl(&k)
                    .ok_or_else(|| parse("entity kind must be class, function or data_member"))?,
                _ => return Err(parse("entity kind must be a bare identifier")),
            };
            let Arg::Quoted(qname) = qname else {
                return Err(parse("entity name must be quoted"));
            };
            let loc = match (file, l, c) {
                (Arg::Dash, Arg::Int(0), Arg::Int(0)) => None,
                (Arg::Quoted(f), Arg::Int(l), Arg::Int(c)) if l >= 1 && c >= 1 => {
                    SourceLoc::new(f, l, c)
                }
                _ => return Err(parse("location must be \"file\",line,col or -,0,0")),
            };
            fb.intern(kind, &qname, loc)
                .map_err(|e| err(ReadErrorKind::Fact(e)))?;
            continue;
        }

        let sig = schema
            .get(name)
            .ok_or_else(|| err(FactError::UnknownPredicate(name.to_owned()).into()))?;
        if sig.arity() != args.len() {
            return Err(err(FactError::ArityMismatch {
                pred: name.to_owned(),
                expected: sig.arity(),
                found: args.len(),
            }
            .into()));
        }
        let mut ids = Vec::with_capacity(args.len());
        for (position, (arg, &sort)) in args.into_iter().zip(&sig.sorts).enumerate() {
            let id = match (arg, sort) {
                (Arg::Quoted(s), _) | (Arg::Bare(s), EntityKind::Symbol) => fb
                    .intern(sort, &s, None)
                    .map_err(|e| err(e.into()))?,
                (Arg::Bare(_), _) => {
                    return Err(err(FactError::SortMismatch {
                        pred: name.to_owned(),
                        position,
                        expected: sort,
                        found: EntityKind::Symbol,
                    }
                    .into()))
                }
                _ => {
                    return Err(err(ReadErrorKind::Parse(
                        "fact arguments must be quoted names or bare symbols".into(),
                    )))
                }
            };
            ids.push(id);
        }
        fb.assert_fact(name, &ids).map_err(|e| err(e.into()))?;
    }
    Ok(fb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_base_is_header_only() {
        assert_eq!(write_fact_file(&FactBase::new()), format!("{HEADER}\n"));
    }

    #[test]
    fn single_class_golden() {
        let mut fb = FactBase::new();
        let a = fb.intern(EntityKind::Class, "A", None).unwrap();
        fb.assert_fact("class", &[a]).unwrap();
        assert_eq!(
            write_fact_file(&fb),
            "% structlint facts v1\nentity(class,\"A\",-,0,0).\nclass(\"A\").\n"
        );
    }

    #[test]
    fn symbols_bare_when_possible() {
        let mut fb = FactBase::new();
        let f = fb.intern(EntityKind::Function, "A::f(int)", None).unwrap();
        let n = fb.symbol("f").unwrap();
        let s = fb.symbol("(int)").unwrap();
        fb.assert_fact("function_name", &[f, n]).unwrap();
        fb.assert_fact("signature", &[f, s]).unwrap();
        let text = write_fact_file(&fb);
        assert!(text.contains("function_name(\"A::f(int)\",f).\n"));
        assert!(text.contains("signature(\"A::f(int)\",\"(int)\").\n"));
        assert_eq!(read_fact_file(&text).unwrap(), fb);
    }

    #[test]
    fn undeclared_names_are_interned() {
        let fb = read_fact_file("class(\"A\").").unwrap();
        assert_eq!(fb.entity_count(), 1);
        let a = fb.lookup(EntityKind::Class, "A").unwrap();
        assert!(fb.contains("class", &[a]));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let e = read_fact_file("% c\nclass(\"A\").\nclass(A\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ReadErrorKind::Parse(_)));
    }

    #[test]
    fn duplicate_facts_collapse() {
        let fb = read_fact_file("class(\"A\").\nclass(\"A\").\n").unwrap();
        assert_eq!(fb.tuples("class").unwrap().len(), 1);
    }

    #[test]
    fn schema_errors_carry_line() {
        let e = read_fact_file("\nfoo(\"A\").").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ReadErrorKind::Fact(FactError::UnknownPredicate(_))));
        let e = read_fact_file("class(a).").unwrap_err();
        assert!(matches!(e.kind, ReadErrorKind::Fact(FactError::SortMismatch { .. })));
        let e = read_fact_file("class(\"A\",\"B\").").unwrap_err();
        assert!(matches!(e.kind, ReadErrorKind::Fact(FactError::ArityMismatch { .. })));
    }

    #[test]
    fn entity_line_with_location() {
        let text = "entity(class,\"A\",\"a.cpp\",3,7).\nclass(\"A\").\n";
        let fb = read_fact_file(text).unwrap();
        let a = fb.lookup(EntityKind::Class, "A").unwrap();
        assert_eq!(fb.entity(a).loc, SourceLoc::new("a.cpp", 3, 7));
        let again = write_fact_file(&fb);
        assert!(again.contains("entity(class,\"A\",\"a.cpp\",3,7).\n"));
        assert!(read_fact_file("entity(class,\"A\",\"a.cpp\",0,7).").is_err());
        assert!(read_fact_file("entity(symbol,\"A\",-,0,0).").is_err());
    }

    #[test]
    fn escapes_round_trip() {
        let mut fb = FactBase::new();
        let a = fb
            .intern(EntityKind::Class, "we\"ird\\", SourceLoc::new("dir\\x \"y\".cpp", 1, 1))
            .unwrap();
        fb.assert_fact("class", &[a]).unwrap();
        let text = write_fact_file(&fb);
        assert_eq!(read_fact_file(&text).unwrap(), fb);
    }
}
