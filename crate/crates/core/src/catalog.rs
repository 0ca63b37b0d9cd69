//! Prelude relations and the built-in rule set.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::datalog::{parse_clauses, stratify, DatalogError, Program, Stratified};
use crate::dsl::{self, DslError, RuleSpec, Ruleset};
use crate::facts::Schema;

const PRELUDE: &str = "\
base_of(X,Y) :- direct_base_of(X,Y).
base_of(X,Y) :- direct_base_of(X,Z), base_of(Z,Y).
is_function(F) :- declares_member_function(C,F).
is_data_member(M) :- data_member(C,M).
is_virtual(F) :- virtual_kw(F).
is_virtual(F) :- declares_member_function(C,F), declares_member_function(B,G), base_of(B,C), function_name(F,N), function_name(G,N), signature(F,S), signature(G,S), is_virtual(G).
is_virtual(F) :- declares_member_function(C,F), destructor(F), declares_member_function(B,G), base_of(B,C), destructor(G), is_virtual(G).
overrides(F,G) :- declares_member_function(C,F), declares_member_function(B,G), base_of(B,C), function_name(F,N), function_name(G,N), signature(F,S), signature(G,S), is_virtual(G).
redefines(F,G) :- declares_member_function(C,F), declares_member_function(B,G), base_of(B,C), function_name(F,N), function_name(G,N), signature(F,S), signature(G,S), \\+ is_virtual(G).
";

struct Builtin {
    id: &'static str,
    title: &'static str,
    message: &'static str,
    vars: &'static [&'static str],
    symmetric: Option<(usize, usize)>,
    clause: &'static str,
}

const BUILTINS: &[Builtin] = &[
    Builtin {
        id: "hicpp_3_3_15",
        title: "ensure base classes common to more than one derived class are virtual",
        message: "base class {a} of {c} must be virtual (diamond via {b} and {c} to {d})",
        vars: &["a", "b", "c", "d"],
        symmetric: Some((1, 2)),
        clause: "violate_hicpp_3_3_15(A,B,C,D) :- class(A), class(B), class(C), class(D), B \\= C, direct_base_of(A,B), direct_base_of(A,C), base_of(B,D), base_of(C,D), \\+ virtual_base_of(A,C).",
    },
    Builtin {
        id: "virtual_dtor_in_base",
        title: "declare the destructor of a base class virtual",
        message: "destructor {f} of base class {b} is not virtual",
        vars: &["b", "f"],
        symmetric: None,
        clause: "violate_virtual_dtor_in_base(B,F) :- class(B), is_function(F), base_of(B,D), declares_member_function(B,F), destructor(F), \\+ is_virtual(F).",
    },
    Builtin {
        id: "no_public_data_member",
        title: "declare data members private or protected",
        message: "data member {m} of {c} is public",
        vars: &["c", "m"],
        symmetric: None,
        clause: "violate_no_public_data_member(C,M) :- class(C), is_data_member(M), data_member(C,M), member_access(C,M,public).",
    },
    Builtin {
        id: "no_redefine_nonvirtual",
        title: "do not redefine an inherited non-virtual function",
        message: "{f} redefines non-virtual {g}",
        vars: &["f", "g"],
        symmetric: None,
        clause: "violate_no_redefine_nonvirtual(F,G) :- is_function(F), is_function(G), redefines(F,G).",
    },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSource {
    Builtin,
    File(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: String,
    pub source: RuleSource,
    pub spec: RuleSpec,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("rule id `{id}` is defined more than once")]
    DuplicateRuleId { id: String },
    #[error("{source_name}: {error}")]
    Rules { source_name: String, error: DslError },
    #[error(transparent)]
    Engine(#[from] DatalogError),
}

/// Derived structural relations available to every rule.
pub fn prelude() -> Program {
    Program::new(parse_clauses(PRELUDE).expect("prelude parses")).expect("prelude is well formed")
}

/// The shipped rules, all enabled.
pub fn builtin_rules() -> Vec<CatalogEntry> {
    BUILTINS
        .iter()
        .map(|b| {
            let clauses = parse_clauses(b.clause).expect("builtin parses");
            CatalogEntry {
                id: b.id.to_owned(),
                source: RuleSource::Builtin,
                spec: RuleSpec {
                    id: b.id.to_owned(),
                    title: Some(b.title.to_owned()),
                    message: b.message.to_owned(),
                    vars: b.vars.iter().map(|v| v.to_string()).collect(),
                    head: dsl::violation_predicate(b.id),
                    clauses,
                    symmetric: b.symmetric,
                },
                enabled: true,
            }
        })
        .collect()
}

/// A checked program together with the rules it reports on.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub program: Stratified,
    /// Enabled rules in catalog order, then user rules in file order.
    pub rules: Vec<CatalogEntry>,
}

/// Combines the prelude, the enabled catalog entries and user rulesets
/// (named by their source) into one stratified program.
pub fn assemble(catalog: &[CatalogEntry], user: &[(String, Ruleset)]) -> Result<Assembled, CatalogError> {
    let mut program = prelude();
    let mut rules = Vec::new();
    let mut ids = BTreeSet::new();
    for e in catalog.iter().filter(|e| e.enabled) {
        if !ids.insert(e.id.clone()) {
            return Err(CatalogError::DuplicateRuleId { id: e.id.clone() });
        }
        for c in &e.spec.clauses {
            program.push(c.clone())?;
        }
        program.mark_query(&e.spec.head);
        rules.push(e.clone());
    }
    for (source_name, rs) in user {
        for r in &rs.rules {
            if !ids.insert(r.name.clone()) {
                return Err(CatalogError::DuplicateRuleId { id: r.name.clone() });
            }
        }
        let (p, specs) = dsl::compile(rs, Schema::base(), &program).map_err(|error| CatalogError::Rules {
            source_name: source_name.clone(),
            error,
        })?;
        program = p;
        rules.extend(specs.into_iter().map(|spec| CatalogEntry {
            id: spec.id.clone(),
            source: RuleSource::File(source_name.clone()),
            spec,
            enabled: true,
        }));
    }
    Ok(Assembled {
        program: stratify(&program)?,
        rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::{evaluate, Database};
    use crate::dsl::parse_ruleset;
    use crate::facts::{EntityId, EntityKind, FactBase};

    const GOLDEN_3_3_15: &str = "violate_hicpp_3_3_15(A,B,C,D) :- class(A), class(B), class(C), class(D), B \\= C, direct_base_of(A,B), direct_base_of(A,C), base_of(B,D), base_of(C,D), \\+ virtual_base_of(A,C).";

    fn class(fb: &mut FactBase, n: &str) -> EntityId {
        let id = fb.intern(EntityKind::Class, n, None).unwrap();
        fb.assert_fact("class", &[id]).unwrap();
        id
    }

    fn method(fb: &mut FactBase, c: EntityId, name: &str, is_virtual: bool) -> EntityId {
        let cname = fb.name(c).to_owned();
        let f = fb
            .intern(EntityKind::Function, &format!("{cname}::{name}()"), None)
            .unwrap();
        let n = fb.symbol(name).unwrap();
        let s = fb.symbol("()").unwrap();
        fb.assert_fact("declares_member_function", &[c, f]).unwrap();
        fb.assert_fact("function_name", &[f, n]).unwrap();
        fb.assert_fact("signature", &[f, s]).unwrap();
        if is_virtual {
            fb.assert_fact("virtual_kw", &[f]).unwrap();
        }
        f
    }

    fn derive(fb: &mut FactBase, base: EntityId, derived: EntityId) {
        fb.assert_fact("direct_base_of", &[base, derived]).unwrap();
    }

    fn names(fb: &FactBase, db: &Database, pred: &str) -> BTreeSet<Vec<String>> {
        db.query(pred)
            .unwrap()
            .into_iter()
            .map(|t| t.into_iter().map(|i| fb.name(EntityId(i)).to_owned()).collect())
            .collect()
    }

    fn eval(fb: &FactBase) -> Database {
        let a = assemble(&builtin_rules(), &[]).unwrap();
        evaluate(&a.program, &Database::from_facts(fb)).unwrap()
    }

    #[test]
    fn golden_dump_of_3_3_15() {
        let b = builtin_rules();
        let e = b.iter().find(|e| e.id == "hicpp_3_3_15").unwrap();
        assert_eq!(e.spec.clauses.len(), 1);
        assert_eq!(e.spec.clauses[0].to_string(), GOLDEN_3_3_15);
    }

    #[test]
    fn implicit_virtual_down_a_chain() {
        let mut fb = FactBase::new();
        let (a, b, c) = (class(&mut fb, "A"), class(&mut fb, "B"), class(&mut fb, "C"));
        derive(&mut fb, a, b);
        derive(&mut fb, b, c);
        method(&mut fb, a, "f", true);
        method(&mut fb, b, "f", false);
        method(&mut fb, c, "f", false);
        let db = eval(&fb);
        let v = names(&fb, &db, "is_virtual");
        for f in ["A::f()", "B::f()", "C::f()"] {
            assert!(v.contains(&vec![f.to_owned()]), "{f}");
        }
        assert!(names(&fb, &db, "redefines").is_empty());
        assert_eq!(names(&fb, &db, "overrides").len(), 3);
    }

    #[test]
    fn no_inheritance_no_overrides() {
        let mut fb = FactBase::new();
        let a = class(&mut fb, "A");
        method(&mut fb, a, "f", true);
        let db = eval(&fb);
        assert!(names(&fb, &db, "overrides").is_empty());
        assert!(names(&fb, &db, "redefines").is_empty());
    }

    #[test]
    fn diamond_closure() {
        let mut fb = FactBase::new();
        let [a, b, c, d] = ["a", "b", "c", "d"].map(|n| class(&mut fb, n));
        derive(&mut fb, a, b);
        derive(&mut fb, a, c);
        derive(&mut fb, b, d);
        derive(&mut fb, c, d);
        let db = eval(&fb);
        let expected: BTreeSet<Vec<String>> = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("a", "d")]
            .iter()
            .map(|(x, y)| vec![x.to_string(), y.to_string()])
            .collect();
        assert_eq!(names(&fb, &db, "base_of"), expected);
        assert_eq!(names(&fb, &db, "violate_hicpp_3_3_15").len(), 2);
    }

    #[test]
    fn redefined_nonvirtual() {
        let mut fb = FactBase::new();
        let (a, b) = (class(&mut fb, "A"), class(&mut fb, "B"));
        derive(&mut fb, a, b);
        method(&mut fb, a, "f", false);
        method(&mut fb, b, "f", false);
        let db = eval(&fb);
        assert_eq!(
            names(&fb, &db, "violate_no_redefine_nonvirtual"),
            BTreeSet::from([vec!["B::f()".to_owned(), "A::f()".to_owned()]])
        );
    }

    #[test]
    fn catalog_stratifies_with_closure_below_rules() {
        let a = assemble(&builtin_rules(), &[]).unwrap();
        let base = a.program.stratum_of("base_of").unwrap();
        for e in &a.rules {
            assert!(base < a.program.stratum_of(&e.spec.head).unwrap(), "{}", e.id);
        }
        assert_eq!(a.rules.len(), 4);
    }

    #[test]
    fn duplicate_id_with_enabled_builtin() {
        let rs = parse_ruleset(include_str!("../rules/hicpp.rules")).unwrap();
        let err = assemble(&builtin_rules(), &[("hicpp.rules".into(), rs.clone())]).unwrap_err();
        assert_eq!(err, CatalogError::DuplicateRuleId { id: "hicpp_3_3_15".into() });
        let mut cat = builtin_rules();
        cat[0].enabled = false;
        let a = assemble(&cat, &[("hicpp.rules".into(), rs)]).unwrap();
        assert_eq!(a.rules.last().unwrap().source, RuleSource::File("hicpp.rules".into()));
    }
}
