//! Turning violation tuples into located, rendered findings.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::catalog::Assembled;
use crate::datalog::{evaluate, Database, DatalogError};
use crate::dsl::{format_message, DslError, RuleSpec};
use crate::facts::{EntityId, FactBase, SourceLoc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule_id: String,
    pub message: String,
    /// (variable, qualified name) in binding order.
    pub witness: Vec<(String, String)>,
    /// Known locations of the witness entities, in binding order.
    pub locations: Vec<SourceLoc>,
    /// Location of the first binding's entity, if known.
    pub primary: Option<SourceLoc>,
}

impl Violation {
    fn sort_key(&self) -> (&str, u32, &str, Vec<&str>) {
        let (file, line) = match &self.primary {
            Some(l) => (l.file.as_str(), l.line),
            None => ("-", 0),
        };
        (file, line, &self.rule_id, self.witness.iter().map(|(_, n)| n.as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Engine(#[from] DatalogError),
    #[error("rule `{rule}`: {error}")]
    Message { rule: String, error: DslError },
}

/// Violations of one rule read off an evaluated database.
pub fn violations_of(
    spec: &RuleSpec,
    model: &Database,
    facts: &FactBase,
    dedup_symmetric: bool,
) -> Result<Vec<Violation>, CheckError> {
    let name = |i: u32| facts.name(EntityId(i)).to_owned();
    let mut tuples: Vec<Vec<u32>> = model.query(&spec.head)?;
    if let (true, Some((i, j))) = (dedup_symmetric, spec.symmetric) {
        // keep the witness with the smaller names of each swapped pair
        let mut best: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
        for t in tuples {
            let mut key = t.clone();
            if name(key[i]) > name(key[j]) {
                key.swap(i, j);
            }
            let names = |t: &Vec<u32>| t.iter().map(|&x| name(x)).collect::<Vec<_>>();
            match best.get(&key) {
                Some(b) if names(b) <= names(&t) => {}
                _ => {
                    best.insert(key, t);
                }
            }
        }
        tuples = best.into_values().collect();
    }
    let mut out = Vec::with_capacity(tuples.len());
    for t in tuples {
        let witness: Vec<(String, String)> = spec
            .vars
            .iter()
            .zip(&t)
            .map(|(v, &x)| (v.clone(), name(x)))
            .collect();
        let message = format_message(&spec.message, &witness).map_err(|error| CheckError::Message {
            rule: spec.id.clone(),
            error,
        })?;
        let locs: Vec<Option<SourceLoc>> = t.iter().map(|&x| facts.entity(EntityId(x)).loc.clone()).collect();
        out.push(Violation {
            rule_id: spec.id.clone(),
            message,
            witness,
            primary: locs.first().cloned().flatten(),
            locations: locs.into_iter().flatten().collect(),
        });
    }
    Ok(out)
}

/// Evaluates an assembled program over a fact base and returns every
/// violation in report order.
pub fn check(facts: &FactBase, assembled: &Assembled, dedup_symmetric: bool) -> Result<Vec<Violation>, CheckError> {
    let model = evaluate(&assembled.program, &Database::from_facts(facts))?;
    let mut out = Vec::new();
    for e in &assembled.rules {
        out.extend(violations_of(&e.spec, &model, facts, dedup_symmetric)?);
    }
    sort(&mut out);
    Ok(out)
}

/// Orders by primary file, line, rule id, then witness names.
pub fn sort(vs: &mut [Violation]) {
    vs.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn render_text(vs: &[Violation]) -> String {
    let mut out = String::new();
    for v in vs {
        match &v.primary {
            Some(l) => write!(out, "{l}"),
            None => write!(out, "-:0:0"),
        }
        .expect("string write");
        writeln!(out, ": violation[{}]: {}", v.rule_id, v.message).expect("string write");
        for (var, name) in &v.witness {
            writeln!(out, "    where {var} = {name}").expect("string write");
        }
    }
    out
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

/// Versioned JSON document with a fixed key order.
pub fn render_json(vs: &[Violation], rules_checked: &[String]) -> String {
    let mut out = String::from("{\n  \"schema_version\": \"1\",\n  \"rules_checked\": [");
    for (i, r) in rules_checked.iter().enumerate() {
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        out.push_str(&json_str(r));
    }
    out.push_str(if rules_checked.is_empty() { "],\n" } else { "\n  ],\n" });
    out.push_str("  \"violations\": [");
    for (i, v) in vs.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        write!(
            out,
            "    {{\n      \"rule\": {},\n      \"message\": {},\n      \"witness\": {{",
            json_str(&v.rule_id),
            json_str(&v.message)
        )
        .expect("string write");
        for (k, (var, name)) in v.witness.iter().enumerate() {
            out.push_str(if k == 0 { "\n" } else { ",\n" });
            write!(out, "        {}: {}", json_str(var), json_str(name)).expect("string write");
        }
        out.push_str(if v.witness.is_empty() { "},\n" } else { "\n      },\n" });
        out.push_str("      \"locations\": [");
        for (k, l) in v.locations.iter().enumerate() {
            out.push_str(if k == 0 { "\n" } else { ",\n" });
            write!(
                out,
                "        {{ \"file\": {}, \"line\": {}, \"col\": {} }}",
                json_str(&l.file),
                l.line,
                l.column
            )
            .expect("string write");
        }
        out.push_str(if v.locations.is_empty() { "]\n    }" } else { "\n      ]\n    }" });
    }
    out.push_str(if vs.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
    out
}
