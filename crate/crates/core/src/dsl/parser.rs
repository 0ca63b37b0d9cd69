use std::collections::BTreeSet;

use super::ast::{ClosureDef, Cond, Domain, DslTerm, RuleAst, Ruleset, Span};
use super::template::{parse_template, Piece};
use super::DslError;
use crate::facts::{EntityKind, Schema};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Eq,
    Neq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

const RESERVED: [&str; 6] = ["relation", "rule", "forall", "where", "report", "not"];

fn syntax(span: Span, expected: impl Into<String>, found: impl Into<String>) -> DslError {
    DslError::Syntax {
        line: span.line,
        col: span.col,
        expected: expected.into(),
        found: found.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        match c {
            c if c.is_whitespace() => advance(&mut i, &mut line, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '(' | ')' | ',' | ':' | '=' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    _ => Tok::Eq,
                };
                advance(&mut i, &mut line, &mut col);
                out.push(Token { tok, span });
            }
            '!' => {
                advance(&mut i, &mut line, &mut col);
                if chars.get(i) != Some(&'=') {
                    return Err(syntax(span, "`!=`", "`!`"));
                }
                advance(&mut i, &mut line, &mut col);
                out.push(Token { tok: Tok::Neq, span });
            }
            '"' => {
                advance(&mut i, &mut line, &mut col);
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(span, "closing `\"`", "end of input")),
                        Some('"') => {
                            advance(&mut i, &mut line, &mut col);
                            break;
                        }
                        Some('\\') => {
                            let esc = match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                _ => {
                                    let at = Span { line, col };
                                    return Err(syntax(at, "escape `\\\"`, `\\\\` or `\\n`", "`\\`"));
                                }
                            };
                            s.push(esc);
                            advance(&mut i, &mut line, &mut col);
                            advance(&mut i, &mut line, &mut col);
                        }
                        Some(&ch) => {
                            s.push(ch);
                            advance(&mut i, &mut line, &mut col);
                        }
                    }
                }
                out.push(Token { tok: Tok::Str(s), span });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = chars.get(i) {
                    if !(ch.is_ascii_alphanumeric() || ch == '_') {
                        break;
                    }
                    s.push(ch);
                    advance(&mut i, &mut line, &mut col);
                }
                out.push(Token { tok: Tok::Ident(s), span });
            }
            c => return Err(syntax(span, "token", format!("`{c}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<Token>,
    pos: usize,
    schema: &'s Schema,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, DslError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t.span)
        } else {
            Err(syntax(t.span, tok.describe(), t.tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), DslError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.span)),
            other => Err(syntax(t.span, what, other.describe())),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Span, DslError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(t.span),
            other => Err(syntax(t.span, format!("`{kw}`"), other.describe())),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn var_name(&mut self) -> Result<(String, Span), DslError> {
        let (v, span) = self.ident("variable")?;
        if !v.starts_with(|c: char| c.is_ascii_lowercase()) || RESERVED.contains(&v.as_str()) {
            return Err(syntax(span, "variable (lowercase identifier)", format!("`{v}`")));
        }
        Ok((v, span))
    }

    fn ruleset(&mut self) -> Result<Ruleset, DslError> {
        let mut rs = Ruleset::default();
        let mut names = BTreeSet::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(rs),
                Tok::Ident(s) if s == "relation" => rs.closures.push(self.closure()?),
                Tok::Ident(s) if s == "rule" => {
                    let r = self.rule()?;
                    if !names.insert(r.name.clone()) {
                        return Err(DslError::DuplicateRuleName {
                            name: r.name,
                            line: r.span.line,
                            col: r.span.col,
                        });
                    }
                    rs.rules.push(r);
                }
                other => return Err(syntax(t.span, "`relation` or `rule`", other.describe())),
            }
        }
    }

    fn closure(&mut self) -> Result<ClosureDef, DslError> {
        let span = self.keyword("relation")?;
        let (name, _) = self.ident("relation name")?;
        self.expect(Tok::Eq)?;
        self.keyword("closure")?;
        self.expect(Tok::LParen)?;
        let (base, _) = self.ident("predicate name")?;
        self.expect(Tok::RParen)?;
        Ok(ClosureDef { name, base, span })
    }

    fn rule(&mut self) -> Result<RuleAst, DslError> {
        let span = self.keyword("rule")?;
        let (name, _) = self.ident("rule name")?;
        let title = match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.next();
                Some(s)
            }
            _ => None,
        };
        self.expect(Tok::Colon)?;
        self.keyword("forall")?;
        let mut bindings: Vec<(String, Domain)> = Vec::new();
        loop {
            let (v, vspan) = self.var_name()?;
            self.expect(Tok::Colon)?;
            let (d, dspan) = self.ident("domain")?;
            let domain = Domain::from_keyword(&d).ok_or_else(|| {
                syntax(dspan, "`class`, `function` or `data_member`", format!("`{d}`"))
            })?;
            if bindings.iter().any(|(b, _)| *b == v) {
                return Err(DslError::DuplicateBinding {
                    var: v,
                    rule: name,
                    line: vspan.line,
                    col: vspan.col,
                });
            }
            bindings.push((v, domain));
            if self.peek().tok != Tok::Comma {
                break;
            }
            self.next();
        }
        self.keyword("where")?;
        let mut conditions = Vec::new();
        loop {
            conditions.push(self.cond(&name, &bindings)?);
            if self.peek().tok != Tok::Comma {
                break;
            }
            self.next();
        }
        self.keyword("report")?;
        let t = self.next();
        let Tok::Str(message) = t.tok else {
            return Err(syntax(t.span, "message string", t.tok.describe()));
        };
        let pieces = parse_template(&message).map_err(|e| syntax(t.span, e, "malformed template"))?;
        for p in pieces {
            if let Piece::Hole(v) = p {
                if !bindings.iter().any(|(b, _)| *b == v) {
                    return Err(DslError::UnboundVariable {
                        var: v,
                        rule: name,
                        line: t.span.line,
                        col: t.span.col,
                    });
                }
            }
        }
        Ok(RuleAst {
            name,
            title,
            bindings,
            conditions,
            message,
            span,
        })
    }

    fn bound_var(
        &self,
        v: String,
        span: Span,
        rule: &str,
        bindings: &[(String, Domain)],
    ) -> Result<String, DslError> {
        if bindings.iter().any(|(b, _)| *b == v) {
            Ok(v)
        } else {
            Err(DslError::UnboundVariable {
                var: v,
                rule: rule.to_owned(),
                line: span.line,
                col: span.col,
            })
        }
    }

    fn cond(&mut self, rule: &str, bindings: &[(String, Domain)]) -> Result<Cond, DslError> {
        let negated = self.at_keyword("not");
        if negated {
            self.next();
        }
        let (first, span) = self.ident("condition")?;
        if !negated && self.peek().tok == Tok::Neq {
            self.next();
            let lhs = self.bound_var(first, span, rule, bindings)?;
            let t = self.next();
            let rhs = match t.tok {
                Tok::Str(s) => DslTerm::Symbol(s),
                Tok::Ident(v) => DslTerm::Var(self.bound_var(v, t.span, rule, bindings)?),
                other => return Err(syntax(t.span, "variable or string", other.describe())),
            };
            return Ok(Cond::Neq(lhs, rhs));
        }
        self.expect(Tok::LParen)?;
        let sorts = self.schema.get(&first).map(|s| s.sorts.clone());
        let mut args = Vec::new();
        loop {
            let t = self.next();
            let idx = args.len();
            let symbol_pos = sorts
                .as_ref()
                .and_then(|s| s.get(idx))
                .is_some_and(|k| *k == EntityKind::Symbol);
            let term = match t.tok {
                Tok::Str(s) => DslTerm::Symbol(s),
                Tok::Ident(v) if bindings.iter().any(|(b, _)| *b == v) => DslTerm::Var(v),
                Tok::Ident(v) if symbol_pos => DslTerm::Symbol(v),
                Tok::Ident(v) => {
                    return Err(DslError::UnboundVariable {
                        var: v,
                        rule: rule.to_owned(),
                        line: t.span.line,
                        col: t.span.col,
                    })
                }
                other => return Err(syntax(t.span, "term", other.describe())),
            };
            args.push(term);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => return Err(syntax(t.span, "`,` or `)`", other.describe())),
            }
        }
        Ok(Cond::Atom {
            pred: first,
            args,
            negated,
        })
    }
}

/// Parses rule-language text. Bare identifiers in argument positions are
/// variables when bound by `forall`, symbols when the base schema declares
/// that position as a symbol, and an error otherwise.
pub fn parse_ruleset(text: &str) -> Result<Ruleset, DslError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        schema: Schema::base(),
    };
    p.ruleset()
}
