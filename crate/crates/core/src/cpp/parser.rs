//! Recursive-descent parser for the class-declaration subset.
//!
//! Only declarations are modelled. Function bodies, constructor
//! initializer lists and initializers are skipped by bracket matching;
//! member forms outside the subset (nested types, friends, using/typedef,
//! templates, enums) are skipped with a warning.

use thiserror::Error;

use super::lexer::{Keyword, Tok, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Access {
    Public,
    Protected,
    Private,
}

impl Access {
    pub fn as_str(self) -> &'static str {
        match self {
            Access::Public => "public",
            Access::Protected => "protected",
            Access::Private => "private",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSpec {
    pub name: String,
    pub line: u32,
    pub col: u32,
    pub is_virtual: bool,
    pub access: Access,
    /// False when the access level came from the class-key default.
    pub explicit_access: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Ordinary,
    Constructor,
    Destructor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub line: u32,
    pub col: u32,
    /// Normalized parameter types, parameter names and defaults removed.
    pub params: Vec<String>,
    pub is_const: bool,
    pub is_virtual: bool,
    pub is_pure: bool,
    pub is_override: bool,
    pub kind: FunctionKind,
    pub access: Access,
}

impl FunctionDecl {
    /// `(int,const char*)`, with a ` const` suffix for const members.
    pub fn signature(&self) -> String {
        let mut s = format!("({})", self.params.join(","));
        if self.is_const {
            s.push_str(" const");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDecl {
    pub name: String,
    pub line: u32,
    pub col: u32,
    pub access: Access,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub line: u32,
    pub col: u32,
    pub is_struct: bool,
    pub bases: Vec<BaseSpec>,
    pub functions: Vec<FunctionDecl>,
    pub data: Vec<DataDecl>,
}

impl ClassDecl {
    pub fn default_access(&self) -> Access {
        if self.is_struct {
            Access::Public
        } else {
            Access::Private
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Parsed {
    pub classes: Vec<ClassDecl>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
    pub found: String,
}

const BUILTIN_TYPE_WORDS: &[&str] = &[
    "void", "bool", "char", "wchar_t", "char8_t", "char16_t", "char32_t", "short", "int", "long",
    "float", "double", "signed", "unsigned", "auto",
];

/// Joins tokens with a single space between adjacent words and no space
/// anywhere else: `const char *` becomes `const char*`.
fn join_tokens(toks: &[&Tok]) -> String {
    let mut s = String::new();
    let mut prev_word = false;
    for t in toks {
        let word = t.is_word();
        if word && prev_word {
            s.push(' ');
        }
        s.push_str(&t.to_string());
        prev_word = word;
    }
    s
}

fn normalize_param(mut toks: Vec<&Tok>) -> String {
    if let Some(eq) = toks.iter().position(|t| matches!(t, Tok::Eq)) {
        toks.truncate(eq);
    }
    let mut suffix: Vec<&Tok> = Vec::new();
    while matches!(toks.last(), Some(Tok::RBracket)) {
        let Some(open) = toks.iter().rposition(|t| matches!(t, Tok::LBracket)) else {
            break;
        };
        let mut group = toks.split_off(open);
        group.append(&mut suffix);
        suffix = group;
    }
    if toks.len() >= 2 {
        if let Some(Tok::Ident(last)) = toks.last() {
            let prev = toks[toks.len() - 2];
            let has_type = toks[..toks.len() - 1]
                .iter()
                .any(|t| matches!(t, Tok::Ident(_)));
            if !BUILTIN_TYPE_WORDS.contains(&last.as_str())
                && !matches!(prev, Tok::ColonColon)
                && has_type
            {
                toks.pop();
            }
        }
    }
    toks.extend(suffix);
    join_tokens(&toks)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    warnings: Vec<Warning>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos)?;
        self.pos += 1;
        Some(t)
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError {
            line,
            col,
            expected: expected.to_owned(),
            found: match self.peek() {
                Some(t) => format!("`{t}`"),
                None => "end of input".to_owned(),
            },
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<&'a Token, SyntaxError> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().expect("peeked"))
        } else {
            Err(self.error(expected))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, u32, u32), SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let t = self.bump().expect("peeked");
                Ok((s.clone(), t.line, t.col))
            }
            _ => Err(self.error(what)),
        }
    }

    fn warn(&mut self, line: u32, col: u32, message: impl Into<String>) {
        self.warnings.push(Warning {
            line,
            col,
            message: message.into(),
        });
    }

    /// Consumes a balanced bracket group starting at the current opener.
    fn skip_group(&mut self) -> Result<(), SyntaxError> {
        let mut stack: Vec<Tok> = Vec::new();
        loop {
            let closer = match self.peek() {
                Some(Tok::LParen) => Some(Tok::RParen),
                Some(Tok::LBracket) => Some(Tok::RBracket),
                Some(Tok::LBrace) => Some(Tok::RBrace),
                _ => None,
            };
            match (closer, self.peek()) {
                (Some(c), _) => stack.push(c),
                (None, None) => {
                    let want = stack.last().map(|t| format!("`{t}`")).unwrap_or_default();
                    return Err(self.error(&want));
                }
                (None, Some(t @ (Tok::RParen | Tok::RBracket | Tok::RBrace))) => {
                    if stack.last() != Some(t) {
                        let want = stack.last().map(|t| format!("`{t}`")).unwrap_or_default();
                        return Err(self.error(&want));
                    }
                    stack.pop();
                }
                _ => {}
            }
            self.bump();
            if stack.is_empty() {
                return Ok(());
            }
        }
    }

    fn program(&mut self) -> Result<Vec<ClassDecl>, SyntaxError> {
        let mut classes = Vec::new();
        while let Some(t) = self.peek() {
            match t {
                Tok::Kw(Keyword::Class | Keyword::Struct) => {
                    if let Some(c) = self.class_def()? {
                        classes.push(c);
                    }
                }
                Tok::Semi => {
                    self.bump();
                }
                _ => return Err(self.error("`class` or `struct`")),
            }
        }
        Ok(classes)
    }

    fn class_def(&mut self) -> Result<Option<ClassDecl>, SyntaxError> {
        let is_struct = matches!(self.bump().map(|t| &t.tok), Some(Tok::Kw(Keyword::Struct)));
        let (name, line, col) = self.expect_ident("class name")?;
        if self.peek() == Some(&Tok::Kw(Keyword::Final)) {
            self.bump();
        }
        if self.peek() == Some(&Tok::Semi) {
            // forward declaration
            self.bump();
            return Ok(None);
        }
        let mut class = ClassDecl {
            name,
            line,
            col,
            is_struct,
            bases: Vec::new(),
            functions: Vec::new(),
            data: Vec::new(),
        };
        if self.peek() == Some(&Tok::Colon) {
            self.bump();
            loop {
                let base = self.base_spec(class.default_access())?;
                class.bases.push(base);
                if self.peek() == Some(&Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::LBrace, "`{`")?;
        self.members(&mut class)?;
        self.expect(Tok::RBrace, "`}`")?;
        self.expect(Tok::Semi, "`;` after class definition")?;
        Ok(Some(class))
    }

    fn access_kw(tok: Option<&Tok>) -> Option<Access> {
        match tok {
            Some(Tok::Kw(Keyword::Public)) => Some(Access::Public),
            Some(Tok::Kw(Keyword::Protected)) => Some(Access::Protected),
            Some(Tok::Kw(Keyword::Private)) => Some(Access::Private),
            _ => None,
        }
    }

    fn base_spec(&mut self, default: Access) -> Result<BaseSpec, SyntaxError> {
        let mut is_virtual = false;
        if self.peek() == Some(&Tok::Kw(Keyword::Virtual)) {
            self.bump();
            is_virtual = true;
        }
        let access = Self::access_kw(self.peek());
        if access.is_some() {
            self.bump();
        }
        if !is_virtual && self.peek() == Some(&Tok::Kw(Keyword::Virtual)) {
            self.bump();
            is_virtual = true;
        }
        let (name, line, col) = self.expect_ident("base class name")?;
        Ok(BaseSpec {
            name,
            line,
            col,
            is_virtual,
            access: access.unwrap_or(default),
            explicit_access: access.is_some(),
        })
    }

    fn members(&mut self, class: &mut ClassDecl) -> Result<(), SyntaxError> {
        let mut access = class.default_access();
        loop {
            match self.peek() {
                None => return Err(self.error("`}`")),
                Some(Tok::RBrace) => return Ok(()),
                Some(Tok::Semi) => {
                    self.bump();
                }
                t @ Some(Tok::Kw(Keyword::Public | Keyword::Protected | Keyword::Private)) => {
                    let region = Self::access_kw(t).expect("matched");
                    self.bump();
                    self.expect(Tok::Colon, "`:` after access specifier")?;
                    access = region;
                }
                Some(Tok::Kw(
                    kw @ (Keyword::Using
                    | Keyword::Typedef
                    | Keyword::Friend
                    | Keyword::Enum
                    | Keyword::Template
                    | Keyword::Class
                    | Keyword::Struct
                    | Keyword::Union),
                )) => {
                    let (line, col) = self.here();
                    self.skip_member()?;
                    self.warn(
                        line,
                        col,
                        format!("skipped unsupported `{}` member", kw.as_str()),
                    );
                }
                Some(Tok::Ident(s)) if s == "static_assert" => {
                    let (line, col) = self.here();
                    self.skip_member()?;
                    self.warn(line, col, "skipped `static_assert`");
                }
                Some(_) => self.member(class, access)?,
            }
        }
    }

    /// Skips one member declaration: up to a top-level `;`, or to the end of
    /// a function body.
    fn skip_member(&mut self) -> Result<(), SyntaxError> {
        let mut prev: Option<&Tok> = None;
        loop {
            match self.peek() {
                None | Some(Tok::RBrace | Tok::RParen | Tok::RBracket) => {
                    return Err(self.error("`;`"))
                }
                Some(Tok::Semi) => {
                    self.bump();
                    return Ok(());
                }
                Some(Tok::LBrace) => {
                    let body = matches!(
                        prev,
                        Some(
                            Tok::RParen
                                | Tok::Kw(
                                    Keyword::Const
                                        | Keyword::Override
                                        | Keyword::Final
                                        | Keyword::Noexcept
                                )
                        )
                    );
                    self.skip_group()?;
                    if self.peek() == Some(&Tok::Semi) {
                        self.bump();
                        return Ok(());
                    }
                    if body {
                        return Ok(());
                    }
                    prev = Some(&Tok::RBrace);
                    continue;
                }
                Some(Tok::LParen | Tok::LBracket) => {
                    self.skip_group()?;
                    prev = Some(&Tok::RParen);
                    continue;
                }
                Some(t) => {
                    prev = Some(t);
                    self.bump();
                }
            }
        }
    }

    fn member(&mut self, class: &mut ClassDecl, access: Access) -> Result<(), SyntaxError> {
        let start = self.pos;
        let mut prefix: Vec<&'a Token> = Vec::new();
        let mut angle = 0usize;
        let mut operator_at: Option<usize> = None;
        loop {
            let Some(t) = self.peek() else {
                return Err(self.error("`;`"));
            };
            if angle > 0 {
                match t {
                    Tok::Lt => angle += 1,
                    Tok::Gt => angle -= 1,
                    Tok::Semi | Tok::LBrace | Tok::RBrace => {
                        return Err(self.error("`>`"));
                    }
                    _ => {}
                }
                prefix.push(self.bump().expect("peeked"));
                continue;
            }
            match t {
                Tok::LParen if operator_at.is_some() && prefix.len() == operator_at.unwrap() + 1 => {
                    // `operator()` names the call operator
                    if self.peek_at(1) == Some(&Tok::RParen) && self.peek_at(2) == Some(&Tok::LParen) {
                        prefix.push(self.bump().expect("peeked"));
                        prefix.push(self.bump().expect("peeked"));
                    }
                    break;
                }
                Tok::LParen
                | Tok::Semi
                | Tok::Eq
                | Tok::LBrace
                | Tok::LBracket
                | Tok::Colon
                | Tok::Comma => {
                    if operator_at.is_some() && !matches!(t, Tok::LParen) {
                        // operator tokens such as `=` or `[]` belong to the name
                        if matches!(t, Tok::LBracket) {
                            prefix.push(self.bump().expect("peeked"));
                            if self.peek() == Some(&Tok::RBracket) {
                                prefix.push(self.bump().expect("peeked"));
                            }
                        } else {
                            prefix.push(self.bump().expect("peeked"));
                        }
                        continue;
                    }
                    break;
                }
                Tok::RBrace | Tok::RParen | Tok::RBracket => return Err(self.error("`;`")),
                Tok::Lt => {
                    angle += 1;
                    prefix.push(self.bump().expect("peeked"));
                }
                Tok::Kw(Keyword::Operator) => {
                    operator_at = Some(prefix.len());
                    prefix.push(self.bump().expect("peeked"));
                }
                _ => prefix.push(self.bump().expect("peeked")),
            }
        }

        if self.peek() == Some(&Tok::LParen) {
            self.function(class, access, start, prefix, operator_at)
        } else {
            self.data(class, access, start, prefix)
        }
    }

    fn function(
        &mut self,
        class: &mut ClassDecl,
        access: Access,
        start: usize,
        prefix: Vec<&'a Token>,
        operator_at: Option<usize>,
    ) -> Result<(), SyntaxError> {
        let (name, line, col, kind, specifiers) = if let Some(op) = operator_at {
            let toks: Vec<&Tok> = prefix[op..].iter().map(|t| &t.tok).collect();
            (
                join_tokens(&toks),
                prefix[op].line,
                prefix[op].col,
                FunctionKind::Ordinary,
                &prefix[..op],
            )
        } else {
            match prefix.last().map(|t| &t.tok) {
                Some(Tok::Ident(n)) => {
                    let last = prefix[prefix.len() - 1];
                    let tilde = prefix.len() >= 2 && prefix[prefix.len() - 2].tok == Tok::Tilde;
                    if tilde {
                        let t = prefix[prefix.len() - 2];
                        (
                            format!("~{n}"),
                            t.line,
                            t.col,
                            FunctionKind::Destructor,
                            &prefix[..prefix.len() - 2],
                        )
                    } else {
                        let kind = if *n == class.name {
                            FunctionKind::Constructor
                        } else {
                            FunctionKind::Ordinary
                        };
                        (n.clone(), last.line, last.col, kind, &prefix[..prefix.len() - 1])
                    }
                }
                _ => {
                    let t = &self.toks[start];
                    let (line, col) = (t.line, t.col);
                    self.pos = start;
                    self.skip_member()?;
                    self.warn(line, col, "skipped unrecognized member declaration");
                    return Ok(());
                }
            }
        };
        let is_virtual = specifiers
            .iter()
            .any(|t| t.tok == Tok::Kw(Keyword::Virtual));

        let params = self.params()?;
        let mut decl = FunctionDecl {
            name,
            line,
            col,
            params,
            is_const: false,
            is_virtual,
            is_pure: false,
            is_override: false,
            kind,
            access,
        };

        loop {
            match self.peek() {
                Some(Tok::Kw(Keyword::Const)) => {
                    decl.is_const = true;
                    self.bump();
                }
                Some(Tok::Kw(Keyword::Override)) => {
                    decl.is_override = true;
                    self.bump();
                }
                Some(Tok::Kw(Keyword::Final | Keyword::Volatile) | Tok::Amp | Tok::AmpAmp) => {
                    self.bump();
                }
                Some(Tok::Kw(Keyword::Noexcept)) => {
                    self.bump();
                    if self.peek() == Some(&Tok::LParen) {
                        self.skip_group()?;
                    }
                }
                Some(Tok::Ident(s)) if s == "throw" => {
                    self.bump();
                    if self.peek() == Some(&Tok::LParen) {
                        self.skip_group()?;
                    }
                }
                Some(Tok::Arrow) => {
                    self.bump();
                    while !matches!(
                        self.peek(),
                        None | Some(Tok::Semi | Tok::LBrace | Tok::Eq | Tok::RBrace)
                    ) {
                        if matches!(self.peek(), Some(Tok::LParen | Tok::LBracket)) {
                            self.skip_group()?;
                        } else {
                            self.bump();
                        }
                    }
                }
                _ => break,
            }
        }

        match self.peek() {
            Some(Tok::Semi) => {
                self.bump();
            }
            Some(Tok::Eq) => {
                self.bump();
                match self.peek() {
                    Some(Tok::Number(n)) if n == "0" => decl.is_pure = true,
                    Some(Tok::Ident(s)) if s == "default" || s == "delete" => {}
                    _ => return Err(self.error("`0`, `default` or `delete`")),
                }
                self.bump();
                self.expect(Tok::Semi, "`;`")?;
            }
            Some(Tok::LBrace) => {
                self.skip_group()?;
                if self.peek() == Some(&Tok::Semi) {
                    self.bump();
                }
            }
            Some(Tok::Colon) => {
                self.bump();
                self.skip_initializers()?;
                if self.peek() == Some(&Tok::Semi) {
                    self.bump();
                }
            }
            _ => return Err(self.error("`;`, `{` or `= 0`")),
        }
        class.functions.push(decl);
        Ok(())
    }

    /// Skips a constructor initializer list and the body that follows it.
    fn skip_initializers(&mut self) -> Result<(), SyntaxError> {
        let mut prev: Option<&Tok> = None;
        loop {
            match self.peek() {
                None | Some(Tok::Semi | Tok::RBrace) => return Err(self.error("constructor body")),
                Some(Tok::LBrace) => {
                    let init = matches!(prev, Some(Tok::Ident(_) | Tok::Gt));
                    self.skip_group()?;
                    if !init {
                        return Ok(());
                    }
                    prev = Some(&Tok::RBrace);
                }
                Some(Tok::LParen | Tok::LBracket) => {
                    self.skip_group()?;
                    prev = Some(&Tok::RParen);
                }
                Some(t) => {
                    prev = Some(t);
                    self.bump();
                }
            }
        }
    }

    fn params(&mut self) -> Result<Vec<String>, SyntaxError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut params: Vec<Vec<&'a Tok>> = vec![Vec::new()];
        let mut depth = 0usize;
        let mut angle = 0usize;
        loop {
            let Some(t) = self.peek() else {
                return Err(self.error("`)`"));
            };
            match t {
                Tok::RParen if depth == 0 => {
                    self.bump();
                    break;
                }
                Tok::LParen | Tok::LBracket | Tok::LBrace => depth += 1,
                Tok::RParen | Tok::RBracket | Tok::RBrace => {
                    if depth == 0 {
                        return Err(self.error("`)`"));
                    }
                    depth -= 1;
                }
                Tok::Lt => angle += 1,
                Tok::Gt => angle = angle.saturating_sub(1),
                Tok::Semi => return Err(self.error("`)`")),
                Tok::Comma if depth == 0 && angle == 0 => {
                    self.bump();
                    params.push(Vec::new());
                    continue;
                }
                _ => {}
            }
            params.last_mut().expect("non-empty").push(t);
            self.bump();
        }
        if params.len() == 1 {
            match params[0].as_slice() {
                [] => return Ok(Vec::new()),
                [Tok::Ident(v)] if v == "void" => return Ok(Vec::new()),
                _ => {}
            }
        }
        if params.iter().any(Vec::is_empty) {
            return Err(self.error("parameter type"));
        }
        Ok(params.into_iter().map(normalize_param).collect())
    }

    fn data(
        &mut self,
        class: &mut ClassDecl,
        access: Access,
        start: usize,
        prefix: Vec<&'a Token>,
    ) -> Result<(), SyntaxError> {
        let first = match (prefix.len(), prefix.last()) {
            (n, Some(t)) if n >= 2 => match &t.tok {
                Tok::Ident(name) => (name.clone(), t.line, t.col),
                _ => {
                    self.pos = start + prefix.len() - 1;
                    return Err(self.error("member name"));
                }
            },
            _ => {
                let t = &self.toks[start];
                let (line, col) = (t.line, t.col);
                self.pos = start;
                self.skip_member()?;
                self.warn(line, col, "skipped unrecognized member declaration");
                return Ok(());
            }
        };
        let mut names = vec![first];
        loop {
            match self.peek() {
                Some(Tok::Semi) => {
                    self.bump();
                    break;
                }
                Some(Tok::Comma) => {
                    self.bump();
                    while matches!(
                        self.peek(),
                        Some(Tok::Star | Tok::Amp | Tok::AmpAmp | Tok::Kw(Keyword::Const))
                    ) {
                        self.bump();
                    }
                    names.push(self.expect_ident("member name")?);
                }
                Some(Tok::LParen | Tok::LBracket | Tok::LBrace) => self.skip_group()?,
                None | Some(Tok::RBrace | Tok::RParen | Tok::RBracket) => {
                    return Err(self.error("`;`"))
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
        class
            .data
            .extend(names.into_iter().map(|(name, line, col)| DataDecl {
                name,
                line,
                col,
                access,
            }));
        Ok(())
    }
}

/// Parses a token stream into class declarations plus warnings for skipped
/// members.
pub fn parse(tokens: &[Token]) -> Result<Parsed, SyntaxError> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        warnings: Vec::new(),
    };
    let classes = p.program()?;
    Ok(Parsed {
        classes,
        warnings: p.warnings,
    })
}
