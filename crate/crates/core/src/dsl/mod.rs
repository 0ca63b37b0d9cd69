//! The rule language: quantified violation patterns and closure
//! definitions, compiled to engine clauses.

mod ast;
mod compile;
mod parser;
mod template;

use thiserror::Error;

pub use ast::{ClosureDef, Cond, Domain, DslTerm, RuleAst, Ruleset, Span};
pub use compile::{check_program, closure_clauses, compile, ir_var, violation_predicate, RuleSpec};
pub use parser::parse_ruleset;
pub use template::format_message;

use crate::datalog::DatalogError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Syntax {
        line: u32,
        col: u32,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: rule `{name}` is defined twice")]
    DuplicateRuleName { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: variable `{var}` in rule `{rule}` is not bound by `forall`")]
    UnboundVariable {
        var: String,
        rule: String,
        line: u32,
        col: u32,
    },
    #[error("{line}:{col}: variable `{var}` is bound twice in rule `{rule}`")]
    DuplicateBinding {
        var: String,
        rule: String,
        line: u32,
        col: u32,
    },
    #[error("unknown predicate `{pred}` in `{rule}`")]
    UnknownPredicateInRule { pred: String, rule: String },
    #[error("predicate `{pred}` in `{rule}` takes {expected} arguments, found {found}")]
    ArityMismatchInRule {
        pred: String,
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid closure `{name}`: {message}")]
    InvalidClosure { name: String, message: String },
    #[error("{}{error}", rule.as_ref().map(|r| format!("in rule `{r}`: ")).unwrap_or_default())]
    Engine {
        rule: Option<String>,
        error: DatalogError,
    },
    #[error("message refers to unknown variable `{0}`")]
    UnknownHole(String),
    #[error("malformed message template: expected {0}")]
    MalformedTemplate(String),
}

impl DslError {
    /// Line and column within the rule file, when the error has one.
    pub fn position(&self) -> Option<(u32, u32)> {
        match self {
            DslError::Syntax { line, col, .. }
            | DslError::DuplicateRuleName { line, col, .. }
            | DslError::UnboundVariable { line, col, .. }
            | DslError::DuplicateBinding { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }
}
