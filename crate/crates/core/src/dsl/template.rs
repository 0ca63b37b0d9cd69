use super::DslError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Piece {
    Text(String),
    Hole(String),
}

/// Splits a message template into literal text and `{var}` holes. `{{` and
/// `}}` stand for literal braces.
pub(crate) fn parse_template(t: &str) -> Result<Vec<Piece>, String> {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut chars = t.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                text.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                text.push('}');
            }
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) if ch.is_ascii_alphanumeric() || ch == '_' => name.push(ch),
                        _ => return Err("`}` closing a `{var}` hole".into()),
                    }
                }
                if name.is_empty() {
                    return Err("variable name inside `{}`".into());
                }
                if !text.is_empty() {
                    out.push(Piece::Text(std::mem::take(&mut text)));
                }
                out.push(Piece::Hole(name));
            }
            '}' => return Err("`}}` for a literal brace".into()),
            c => text.push(c),
        }
    }
    if !text.is_empty() {
        out.push(Piece::Text(text));
    }
    Ok(out)
}

/// Instantiates a message template with a witness given as (variable,
/// qualified name) pairs.
pub fn format_message(template: &str, witness: &[(String, String)]) -> Result<String, DslError> {
    let pieces = parse_template(template).map_err(DslError::MalformedTemplate)?;
    let mut out = String::new();
    for p in pieces {
        match p {
            Piece::Text(t) => out.push_str(&t),
            Piece::Hole(v) => match witness.iter().find(|(w, _)| *w == v) {
                Some((_, name)) => out.push_str(name),
                None => return Err(DslError::UnknownHole(v)),
            },
        }
    }
    Ok(out)
}
