use proptest::prelude::*;
use proptest::sample::select;
use structlint::dsl::{parse_ruleset, ClosureDef, Cond, Domain, DslTerm, RuleAst, Ruleset, Span};
use structlint::facts::{read_fact_file, write_fact_file, EntityKind, FactBase, SourceLoc};

fn name() -> impl Strategy<Value = String> {
    prop_oneof![
        "[A-Za-z_][A-Za-z0-9_:]{0,8}",
        "[a-z][a-z0-9_]{0,6}",
        "\\PC{1,6}",
        "[a-z \"\\\\\n(),.~*&]{1,8}",
    ]
}

#[derive(Debug, Clone)]
struct EntitySpec {
    kind: EntityKind,
    name: String,
    loc: Option<(String, u32, u32)>,
}

fn entity() -> impl Strategy<Value = EntitySpec> {
    (
        select(vec![EntityKind::Class, EntityKind::Function, EntityKind::DataMember, EntityKind::Symbol]),
        name(),
        proptest::option::of((name(), 1u32..500, 1u32..120)),
    )
        .prop_map(|(kind, name, loc)| EntitySpec {
            kind,
            name,
            loc: if kind == EntityKind::Symbol { None } else { loc },
        })
}

fn build(entities: &[EntitySpec], picks: &[(usize, Vec<usize>)]) -> FactBase {
    let mut fb = FactBase::new();
    // symbols exist only through the facts that mention them
    let ids: Vec<_> = entities
        .iter()
        .map(|e| {
            let loc = e.loc.as_ref().and_then(|(f, l, c)| SourceLoc::new(f.as_str(), *l, *c));
            (e.kind != EntityKind::Symbol).then(|| fb.intern(e.kind, &e.name, loc).unwrap())
        })
        .collect();
    let preds: Vec<_> = fb.schema().iter().cloned().collect();
    for (p, args) in picks {
        let sig = &preds[p % preds.len()];
        // pick an entity of the required sort for each position, if any
        let mut tuple = Vec::new();
        for (k, sort) in sig.sorts.iter().enumerate() {
            let candidates: Vec<_> = entities
                .iter()
                .zip(&ids)
                .filter(|(e, _)| e.kind == *sort)
                .collect();
            if candidates.is_empty() {
                break;
            }
            let (e, id) = candidates[args.get(k).copied().unwrap_or(0) % candidates.len()];
            tuple.push(match id {
                Some(id) => *id,
                None => fb.symbol(&e.name).unwrap(),
            });
        }
        if tuple.len() == sig.arity() {
            fb.assert_fact(sig.name, &tuple).unwrap();
        }
    }
    fb
}

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,5}".prop_filter("reserved", |s| {
        !["relation", "rule", "forall", "where", "report", "not"].contains(&s.as_str())
    })
}

fn escape_braces(s: &str) -> String {
    s.replace('{', "{{").replace('}', "}}")
}

fn rule() -> impl Strategy<Value = RuleAst> {
    (
        ident(),
        proptest::option::of("\\PC{0,12}"),
        proptest::collection::btree_set(ident(), 1..5),
        proptest::collection::vec(select(vec![Domain::Class, Domain::Function, Domain::DataMember]), 4),
        proptest::collection::vec((ident(), any::<bool>(), proptest::collection::vec((any::<bool>(), any::<usize>(), "\\PC{0,5}"), 1..4), any::<bool>()), 1..5),
        proptest::collection::vec(("\\PC{0,6}", any::<usize>()), 0..4),
    )
        .prop_map(|(name, title, vars, domains, conds, msg)| {
            let vars: Vec<String> = vars.into_iter().collect();
            let bindings: Vec<(String, Domain)> = vars.iter().cloned().zip(domains).collect();
            let term = |is_var: bool, i: usize, s: &str| {
                if is_var {
                    DslTerm::Var(vars[i % vars.len()].clone())
                } else {
                    DslTerm::Symbol(s.to_owned())
                }
            };
            let conditions = conds
                .into_iter()
                .map(|(pred, negated, args, neq)| {
                    if neq {
                        let (v, i, s) = &args[0];
                        Cond::Neq(vars[*i % vars.len()].clone(), term(*v, i / 7, s))
                    } else {
                        Cond::Atom {
                            pred,
                            args: args.iter().map(|(v, i, s)| term(*v, *i, s)).collect(),
                            negated,
                        }
                    }
                })
                .collect();
            let mut message = String::new();
            for (text, i) in msg {
                message.push_str(&escape_braces(&text));
                message.push_str(&format!("{{{}}}", vars[i % vars.len()]));
            }
            RuleAst {
                name,
                title,
                bindings,
                conditions,
                message,
                span: Span::default(),
            }
        })
}

proptest! {
    #[test]
    fn fact_file_write_read_write(
        entities in proptest::collection::vec(entity(), 0..12),
        picks in proptest::collection::vec((any::<usize>(), proptest::collection::vec(any::<usize>(), 3)), 0..30),
    ) {
        let fb = build(&entities, &picks);
        let first = write_fact_file(&fb);
        let back = read_fact_file(&first).unwrap();
        prop_assert_eq!(&back, &fb);
        prop_assert_eq!(write_fact_file(&back), first);
    }

    #[test]
    fn ruleset_print_parse(
        closures in proptest::collection::vec((ident(), ident()), 0..3),
        rules in proptest::collection::vec(rule(), 0..4),
    ) {
        let mut seen = std::collections::BTreeSet::new();
        let rules: Vec<RuleAst> = rules.into_iter().filter(|r| seen.insert(r.name.clone())).collect();
        let rs = Ruleset {
            closures: closures
                .into_iter()
                .map(|(name, base)| ClosureDef { name, base, span: Span::default() })
                .collect(),
            rules,
        };
        let printed = rs.to_string();
        let parsed = parse_ruleset(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&parsed, &rs);
        prop_assert_eq!(parsed.to_string(), printed);
    }
}
