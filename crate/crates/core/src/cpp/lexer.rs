use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Class,
    Struct,
    Union,
    Enum,
    Virtual,
    Public,
    Protected,
    Private,
    Const,
    Volatile,
    Override,
    Final,
    Static,
    Inline,
    Explicit,
    Friend,
    Using,
    Typedef,
    Template,
    Operator,
    Noexcept,
    Mutable,
    Constexpr,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Self> {
        use Keyword::*;
        Some(match s {
            "class" => Class,
            "struct" => Struct,
            "union" => Union,
            "enum" => Enum,
            "virtual" => Virtual,
            "public" => Public,
            "protected" => Protected,
            "private" => Private,
            "const" => Const,
            "volatile" => Volatile,
            "override" => Override,
            "final" => Final,
            "static" => Static,
            "inline" => Inline,
            "explicit" => Explicit,
            "friend" => Friend,
            "using" => Using,
            "typedef" => Typedef,
            "template" => Template,
            "operator" => Operator,
            "noexcept" => Noexcept,
            "mutable" => Mutable,
            "constexpr" => Constexpr,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            Class => "class",
            Struct => "struct",
            Union => "union",
            Enum => "enum",
            Virtual => "virtual",
            Public => "public",
            Protected => "protected",
            Private => "private",
            Const => "const",
            Volatile => "volatile",
            Override => "override",
            Final => "final",
            Static => "static",
            Inline => "inline",
            Explicit => "explicit",
            Friend => "friend",
            Using => "using",
            Typedef => "typedef",
            Template => "template",
            Operator => "operator",
            Noexcept => "noexcept",
            Mutable => "mutable",
            Constexpr => "constexpr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Kw(Keyword),
    Ident(String),
    Number(String),
    Str(String),
    Char(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Semi,
    Colon,
    ColonColon,
    Comma,
    Tilde,
    Eq,
    Star,
    Amp,
    AmpAmp,
    Arrow,
    Other(char),
}

impl Tok {
    /// Identifier-like tokens that need a space between them when joined.
    pub fn is_word(&self) -> bool {
        matches!(self, Tok::Kw(_) | Tok::Ident(_) | Tok::Number(_))
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Kw(k) => f.write_str(k.as_str()),
            Tok::Ident(s) | Tok::Number(s) => f.write_str(s),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Char(s) => write!(f, "'{s}'"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::Lt => f.write_str("<"),
            Tok::Gt => f.write_str(">"),
            Tok::Semi => f.write_str(";"),
            Tok::Colon => f.write_str(":"),
            Tok::ColonColon => f.write_str("::"),
            Tok::Comma => f.write_str(","),
            Tok::Tilde => f.write_str("~"),
            Tok::Eq => f.write_str("="),
            Tok::Star => f.write_str("*"),
            Tok::Amp => f.write_str("&"),
            Tok::AmpAmp => f.write_str("&&"),
            Tok::Arrow => f.write_str("->"),
            Tok::Other(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }
}

/// Splits source text into tokens, dropping whitespace and comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        let err = |message: &str| LexError {
            line,
            col,
            message: message.to_owned(),
        };
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek2() == Some('*') {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == '*' && cur.peek() == Some('/') {
                    cur.bump();
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(err("unterminated block comment"));
            }
            continue;
        }
        let tok = if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            match Keyword::from_ident(&s) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(s),
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '.' || c == '_' || c == '\'' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            Tok::Number(s)
        } else if c == '"' || c == '\'' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(err(if c == '"' {
                            "unterminated string literal"
                        } else {
                            "unterminated character literal"
                        }))
                    }
                    Some('\\') => {
                        s.push('\\');
                        match cur.bump() {
                            Some(e) if e != '\n' => s.push(e),
                            _ => return Err(err("unterminated literal")),
                        }
                    }
                    Some(q) if q == c => break,
                    Some(o) => s.push(o),
                }
            }
            if c == '"' {
                Tok::Str(s)
            } else {
                Tok::Char(s)
            }
        } else {
            cur.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '~' => Tok::Tilde,
                '=' => Tok::Eq,
                '*' => Tok::Star,
                ':' if cur.peek() == Some(':') => {
                    cur.bump();
                    Tok::ColonColon
                }
                ':' => Tok::Colon,
                '&' if cur.peek() == Some('&') => {
                    cur.bump();
                    Tok::AmpAmp
                }
                '&' => Tok::Amp,
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                other => Tok::Other(other),
            }
        };
        out.push(Token { tok, line, col });
    }
    Ok(out)
}
