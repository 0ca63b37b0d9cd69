use std::fmt;

/// Source position of a definition. Ignored by equality so that a parsed
/// and a re-parsed pretty-printed ruleset compare equal.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Class,
    Function,
    DataMember,
}

impl Domain {
    pub fn keyword(self) -> &'static str {
        match self {
            Domain::Class => "class",
            Domain::Function => "function",
            Domain::DataMember => "data_member",
        }
    }

    /// Unary predicate enumerating the domain.
    pub fn predicate(self) -> &'static str {
        match self {
            Domain::Class => "class",
            Domain::Function => "is_function",
            Domain::DataMember => "is_data_member",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Domain> {
        match s {
            "class" => Some(Domain::Class),
            "function" => Some(Domain::Function),
            "data_member" => Some(Domain::DataMember),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DslTerm {
    Var(String),
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Atom {
        pred: String,
        args: Vec<DslTerm>,
        negated: bool,
    },
    Neq(String, DslTerm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureDef {
    pub name: String,
    pub base: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAst {
    pub name: String,
    pub title: Option<String>,
    pub bindings: Vec<(String, Domain)>,
    pub conditions: Vec<Cond>,
    pub message: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ruleset {
    pub closures: Vec<ClosureDef>,
    pub rules: Vec<RuleAst>,
}

impl Ruleset {
    pub fn is_empty(&self) -> bool {
        self.closures.is_empty() && self.rules.is_empty()
    }

    /// Concatenates several rulesets in order.
    pub fn merge<'a>(sets: impl IntoIterator<Item = &'a Ruleset>) -> Ruleset {
        let mut out = Ruleset::default();
        for s in sets {
            out.closures.extend(s.closures.iter().cloned());
            out.rules.extend(s.rules.iter().cloned());
        }
        out
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
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
    out
}

impl fmt::Display for DslTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslTerm::Var(v) => f.write_str(v),
            DslTerm::Symbol(s) => f.write_str(&quote(s)),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Atom {
                pred,
                args,
                negated,
            } => {
                if *negated {
                    f.write_str("not ")?;
                }
                write!(f, "{pred}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Cond::Neq(v, t) => write!(f, "{v} != {t}"),
        }
    }
}

impl fmt::Display for ClosureDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "relation {} = closure({})", self.name, self.base)
    }
}

impl fmt::Display for RuleAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.name)?;
        if let Some(t) = &self.title {
            write!(f, " {}", quote(t))?;
        }
        f.write_str(":\n  forall ")?;
        for (i, (v, d)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: {}", d.keyword())?;
        }
        f.write_str("\n  where ")?;
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "\n  report {}", quote(&self.message))
    }
}

impl fmt::Display for Ruleset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.closures {
            writeln!(f, "{c}")?;
        }
        for r in &self.rules {
            writeln!(f)?;
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
