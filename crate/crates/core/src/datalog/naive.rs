//! Naive stratified evaluation over ordered sets. Slow and simple; the
//! semi-naive engine is tested against it.

use std::collections::{BTreeMap, BTreeSet};

use super::ir::{Atom, Clause, Term};
use super::relation::Database;
use super::stratify::Stratified;

type Sets = BTreeMap<String, BTreeSet<Vec<u32>>>;
type Binding = BTreeMap<String, u32>;

fn value(t: &Term, b: &Binding, db: &Database) -> Option<u32> {
    match t {
        Term::Var(v) => b.get(v).copied(),
        Term::Const(c) => db.constant(c),
    }
}

fn matches(atom: &Atom, tuple: &[u32], b: &Binding, db: &Database) -> Option<Binding> {
    let mut out = b.clone();
    for (t, &x) in atom.args.iter().zip(tuple) {
        match t {
            Term::Var(v) => match out.get(v) {
                Some(&y) if y != x => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), x);
                }
            },
            Term::Const(c) => {
                if db.constant(c) != Some(x) {
                    return None;
                }
            }
        }
    }
    Some(out)
}

fn fire(clause: &Clause, sets: &Sets, db: &Database) -> Vec<Vec<u32>> {
    let empty = BTreeSet::new();
    let mut bindings = vec![Binding::new()];
    for atom in clause.positive() {
        let rel = sets.get(&atom.pred).unwrap_or(&empty);
        let mut next = Vec::new();
        for b in &bindings {
            for t in rel {
                if let Some(nb) = matches(atom, t, b, db) {
                    next.push(nb);
                }
            }
        }
        bindings = next;
    }
    bindings
        .into_iter()
        .filter(|b| {
            clause.negative().all(|atom| {
                let tuple: Option<Vec<u32>> =
                    atom.args.iter().map(|t| value(t, b, db)).collect();
                match tuple {
                    Some(t) => !sets.get(&atom.pred).is_some_and(|r| r.contains(&t)),
                    None => true,
                }
            }) && clause
                .constraints()
                .all(|(x, y)| match (value(x, b, db), value(y, b, db)) {
                    (Some(a), Some(c)) => a != c,
                    _ => match (x, y) {
                        (Term::Const(a), Term::Const(c)) => a != c,
                        _ => true,
                    },
                })
        })
        .map(|b| clause.head.args.iter().map(|t| value(t, &b, db).expect("safe")).collect())
        .collect()
}

/// Evaluates stratum by stratum, re-running every clause of a stratum until
/// no new tuple appears.
pub fn evaluate_naive(program: &Stratified, db: &Database) -> Sets {
    let mut sets = db.to_sets();
    let prog = program.program();
    for p in prog.derived().keys().chain(prog.base().keys()) {
        sets.entry(p.clone()).or_default();
    }
    for s in 0..program.strata().len() {
        loop {
            let mut changed = false;
            for c in program.clauses_in(s) {
                for t in fire(c, &sets, db) {
                    changed |= sets.get_mut(&c.head.pred).expect("declared").insert(t);
                }
            }
            if !changed {
                break;
            }
        }
    }
    sets
}
