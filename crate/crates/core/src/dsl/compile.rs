use std::collections::{BTreeMap, BTreeSet};

use super::ast::{ClosureDef, Cond, DslTerm, RuleAst, Ruleset};
use super::DslError;
use crate::datalog::{stratify, Atom, BodyItem, Clause, DatalogError, Program, Term};
use crate::facts::Schema;

/// Metadata and clauses of one compiled rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub id: String,
    pub title: Option<String>,
    pub message: String,
    /// Witness variables in binding order, as named in messages.
    pub vars: Vec<String>,
    /// The violation predicate, `violate_<id>`.
    pub head: String,
    pub clauses: Vec<Clause>,
    /// Witness positions whose swap yields the same finding, used by the
    /// report-level symmetric deduplication.
    pub symmetric: Option<(usize, usize)>,
}

pub fn violation_predicate(id: &str) -> String {
    format!("violate_{id}")
}

/// Engine variable for a rule variable: first letter upper-cased.
pub fn ir_var(v: &str) -> String {
    let mut cs = v.chars();
    match cs.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + cs.as_str(),
        None => String::new(),
    }
}

/// The two clauses defining `name` as the transitive closure of `base`.
pub fn closure_clauses(name: &str, base: &str) -> Vec<Clause> {
    let v = |s: &str| Term::var(s);
    vec![
        Clause::new(
            Atom::new(name, vec![v("X"), v("Y")]),
            vec![BodyItem::pos(Atom::new(base, vec![v("X"), v("Y")]))],
        ),
        Clause::new(
            Atom::new(name, vec![v("X"), v("Y")]),
            vec![
                BodyItem::pos(Atom::new(base, vec![v("X"), v("Z")])),
                BodyItem::pos(Atom::new(name, vec![v("Z"), v("Y")])),
            ],
        ),
    ]
}

fn canonical_set<'a>(cs: impl IntoIterator<Item = &'a Clause>) -> BTreeSet<Clause> {
    cs.into_iter().map(Clause::canonical).collect()
}

struct Env<'a> {
    schema: &'a Schema,
    program: Program,
    closures: BTreeMap<String, usize>,
}

impl Env<'_> {
    fn arity(&self, pred: &str) -> Option<usize> {
        self.schema
            .get(pred)
            .map(|s| s.arity())
            .or_else(|| self.program.derived().get(pred).copied())
            .or_else(|| self.closures.get(pred).copied())
    }

    fn closure(&mut self, c: &ClosureDef) -> Result<(), DslError> {
        let invalid = |message: String| DslError::InvalidClosure {
            name: c.name.clone(),
            message,
        };
        match self.arity(&c.base) {
            None => {
                return Err(DslError::UnknownPredicateInRule {
                    pred: c.base.clone(),
                    rule: c.name.clone(),
                })
            }
            Some(2) => {}
            Some(n) => {
                return Err(DslError::ArityMismatchInRule {
                    pred: c.base.clone(),
                    rule: c.name.clone(),
                    expected: 2,
                    found: n,
                })
            }
        }
        if self.schema.contains(&c.name) {
            return Err(invalid("name is a base predicate".into()));
        }
        if c.name.starts_with("violate_") {
            return Err(invalid("name is reserved for violation predicates".into()));
        }
        let wanted = closure_clauses(&c.name, &c.base);
        if self.program.derived().contains_key(&c.name) {
            // re-declaring an identical closure is a no-op
            let existing = self.program.clauses().iter().filter(|cl| cl.head.pred == c.name);
            if canonical_set(existing) == canonical_set(&wanted) {
                return Ok(());
            }
            return Err(invalid("name is already defined differently".into()));
        }
        for cl in wanted {
            self.program.push(cl).map_err(|error| DslError::Engine {
                rule: Some(c.name.clone()),
                error,
            })?;
        }
        self.closures.insert(c.name.clone(), 2);
        Ok(())
    }

    fn rule(&mut self, r: &RuleAst) -> Result<RuleSpec, DslError> {
        let head = violation_predicate(&r.name);
        if self.program.derived().contains_key(&head) {
            return Err(DslError::DuplicateRuleName {
                name: r.name.clone(),
                line: r.span.line,
                col: r.span.col,
            });
        }
        let mut body: Vec<BodyItem> = r
            .bindings
            .iter()
            .map(|(v, d)| BodyItem::pos(Atom::new(d.predicate(), vec![Term::var(ir_var(v))])))
            .collect();
        let term = |t: &DslTerm| match t {
            DslTerm::Var(v) => Term::var(ir_var(v)),
            DslTerm::Symbol(s) => Term::constant(s.clone()),
        };
        for c in &r.conditions {
            match c {
                Cond::Atom {
                    pred,
                    args,
                    negated,
                } => {
                    match self.arity(pred) {
                        None => {
                            return Err(DslError::UnknownPredicateInRule {
                                pred: pred.clone(),
                                rule: r.name.clone(),
                            })
                        }
                        Some(n) if n != args.len() => {
                            return Err(DslError::ArityMismatchInRule {
                                pred: pred.clone(),
                                rule: r.name.clone(),
                                expected: n,
                                found: args.len(),
                            })
                        }
                        Some(_) => {}
                    }
                    let atom = Atom::new(pred.clone(), args.iter().map(term).collect());
                    body.push(if *negated { BodyItem::neg(atom) } else { BodyItem::pos(atom) });
                }
                Cond::Neq(v, t) => body.push(BodyItem::Neq(Term::var(ir_var(v)), term(t))),
            }
        }
        let vars: Vec<String> = r.bindings.iter().map(|(v, _)| v.clone()).collect();
        let clause = Clause::new(
            Atom::new(head.clone(), vars.iter().map(|v| Term::var(ir_var(v))).collect()),
            body,
        );
        self.program.push(clause.clone()).map_err(|error| DslError::Engine {
            rule: Some(r.name.clone()),
            error,
        })?;
        self.program.mark_query(&head);
        Ok(RuleSpec {
            id: r.name.clone(),
            title: r.title.clone(),
            message: r.message.clone(),
            vars,
            head,
            clauses: vec![clause],
            symmetric: None,
        })
    }
}

/// Compiles a ruleset on top of `context` (the prelude, possibly with
/// further rules). Returns the combined program, checked for safety and
/// stratification, and one spec per rule.
pub fn compile(rules: &Ruleset, schema: &Schema, context: &Program) -> Result<(Program, Vec<RuleSpec>), DslError> {
    let mut env = Env {
        schema,
        program: context.clone(),
        closures: BTreeMap::new(),
    };
    for c in &rules.closures {
        env.closure(c)?;
    }
    let mut specs = Vec::new();
    for r in &rules.rules {
        specs.push(env.rule(r)?);
    }
    check_program(&env.program, &specs)?;
    Ok((env.program, specs))
}

/// Stratifies `program`, attributing a failure to the rule whose clause
/// caused it when there is one.
pub fn check_program(program: &Program, specs: &[RuleSpec]) -> Result<(), DslError> {
    stratify(program).map(|_| ()).map_err(|error| {
        let rule = match &error {
            DatalogError::UnsafeVariable { clause, .. } | DatalogError::ConstantInHead { clause } => specs
                .iter()
                .find(|s| s.clauses.iter().any(|c| c.to_string() == *clause))
                .map(|s| s.id.clone()),
            DatalogError::QueryDependency { to, .. } => {
                specs.iter().find(|s| s.head == *to).map(|s| s.id.clone())
            }
            _ => None,
        };
        DslError::Engine { rule, error }
    })
}
