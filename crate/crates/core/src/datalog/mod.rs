//! Stratified Datalog with negation and disequality.

mod eval;
pub mod ir;
mod naive;
mod relation;
mod stratify;

use thiserror::Error;

pub use eval::evaluate;
pub use ir::{parse_clauses, Atom, BodyItem, Clause, IrParseError, Literal, Program, Term};
pub use naive::evaluate_naive;
pub use relation::{Database, Relation};
pub use stratify::{check_safety, stratify, Stratified};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatalogError {
    #[error("predicate `{pred}` used with arity {found}, expected {expected}")]
    ArityConflict {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("constant in clause head: {clause}")]
    ConstantInHead { clause: String },
    #[error("variable `{var}` is not bound by a positive literal in: {clause}")]
    UnsafeVariable { var: String, clause: String },
    #[error("negation cycle through {}", cycle.join(" -> "))]
    CyclicNegation { cycle: Vec<String> },
    #[error("`{from}` depends on violation predicate `{to}`")]
    QueryDependency { from: String, to: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

/// Stratifies and evaluates in one step.
pub fn run(program: &Program, db: &Database) -> Result<Database, DatalogError> {
    evaluate(&stratify(program)?, db)
}
