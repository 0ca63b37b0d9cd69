// Random small Datalog programs and databases for engine oracle tests.

use rand::seq::SliceRandom;
use rand::Rng;
use structlint::datalog::{stratify, Atom, BodyItem, Clause, Database, Program, Stratified, Term};

const VARS: [&str; 4] = ["X", "Y", "Z", "W"];
const BASE: [(&str, usize); 2] = [("e", 2), ("n", 1)];

pub fn random_db(rng: &mut impl Rng) -> Database {
    let mut db = Database::new();
    for (p, a) in BASE {
        db.declare(p, a).unwrap();
    }
    db.define_constant("k", 0);
    let tuples = rng.gen_range(4..=30);
    for _ in 0..tuples {
        let (p, a) = *BASE.choose(rng).unwrap();
        let t: Vec<u32> = (0..a).map(|_| rng.gen_range(0..6)).collect();
        db.insert(p, &t).unwrap();
    }
    db
}

fn random_term(rng: &mut impl Rng, bound: &[String]) -> Term {
    if rng.gen_bool(0.1) {
        Term::constant(if rng.gen_bool(0.8) { "k" } else { "zz" })
    } else if !bound.is_empty() && rng.gen_bool(0.6) {
        Term::var(bound.choose(rng).unwrap().clone())
    } else {
        Term::var(*VARS.choose(rng).unwrap())
    }
}

fn random_clause(rng: &mut impl Rng, preds: &[(String, usize)], heads: &[(String, usize)], allow_neg: bool) -> Clause {
    let mut body = Vec::new();
    let mut bound: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let (p, a) = preds.choose(rng).unwrap();
        let args: Vec<Term> = (0..*a).map(|_| random_term(rng, &bound)).collect();
        for t in &args {
            if let Some(v) = t.as_var() {
                if !bound.iter().any(|b| b == v) {
                    bound.push(v.to_owned());
                }
            }
        }
        body.push(BodyItem::pos(Atom::new(p.clone(), args)));
    }
    let pick = |rng: &mut dyn rand::RngCore, bound: &[String]| -> Term {
        match bound.choose(rng) {
            Some(v) => Term::var(v.clone()),
            None => Term::constant("k"),
        }
    };
    if allow_neg && !bound.is_empty() && rng.gen_bool(0.4) {
        let (p, a) = preds.choose(rng).unwrap();
        let args = (0..*a).map(|_| pick(rng, &bound)).collect();
        body.insert(rng.gen_range(0..=body.len()), BodyItem::neg(Atom::new(p.clone(), args)));
    }
    if !bound.is_empty() && rng.gen_bool(0.3) {
        let x = pick(rng, &bound);
        let y = if rng.gen_bool(0.3) { Term::constant("k") } else { pick(rng, &bound) };
        body.insert(rng.gen_range(0..=body.len()), BodyItem::Neq(x, y));
    }
    let (h, a) = heads.choose(rng).unwrap();
    let head_args = (0..*a)
        .map(|_| match bound.choose(rng) {
            Some(v) => Term::var(v.clone()),
            None => Term::var("X"),
        })
        .collect();
    Clause::new(Atom::new(h.clone(), head_args), body)
}

/// A safe, stratifiable program with at most 4 derived predicates and at
/// most 6 clauses. Retries until one stratifies.
pub fn random_program(rng: &mut impl Rng, allow_neg: bool) -> Stratified {
    loop {
        let nderived = rng.gen_range(1..=4);
        let heads: Vec<(String, usize)> = (0..nderived)
            .map(|i| (format!("p{i}"), rng.gen_range(0..=2)))
            .collect();
        let mut preds: Vec<(String, usize)> = BASE.iter().map(|(p, a)| (p.to_string(), *a)).collect();
        preds.extend(heads.iter().cloned());
        let clauses: Vec<Clause> = (0..rng.gen_range(1..=6))
            .map(|_| random_clause(rng, &preds, &heads, allow_neg))
            .collect();
        let Ok(p) = Program::new(clauses) else { continue };
        if let Ok(s) = stratify(&p) {
            return s;
        }
    }
}
