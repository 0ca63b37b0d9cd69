use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::EntityKind;

/// Declared shape of one base predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: &'static str,
    pub sorts: Vec<EntityKind>,
}

impl PredicateSig {
    pub fn arity(&self) -> usize {
        self.sorts.len()
    }
}

/// The fixed vocabulary of base predicates describing program structure.
#[derive(Debug, Clone)]
pub struct Schema {
    preds: BTreeMap<&'static str, PredicateSig>,
}

impl Schema {
    /// The base predicate schema shared by the extractor, the fact-file
    /// reader and the rule compiler.
    pub fn base() -> &'static Schema {
        static BASE: OnceLock<Schema> = OnceLock::new();
        BASE.get_or_init(|| {
            use EntityKind::*;
            let entries: [(&'static str, &[EntityKind]); 13] = [
                ("class", &[Class]),
                ("direct_base_of", &[Class, Class]),
                ("virtual_base_of", &[Class, Class]),
                ("base_access", &[Class, Class, Symbol]),
                ("declares_member_function", &[Class, Function]),
                ("function_name", &[Function, Symbol]),
                ("signature", &[Function, Symbol]),
                ("virtual_kw", &[Function]),
                ("pure_virtual", &[Function]),
                ("destructor", &[Function]),
                ("constructor", &[Function]),
                ("data_member", &[Class, DataMember]),
                ("member_access", &[Class, DataMember, Symbol]),
            ];
            let preds = entries
                .into_iter()
                .map(|(name, sorts)| {
                    (
                        name,
                        PredicateSig {
                            name,
                            sorts: sorts.to_vec(),
                        },
                    )
                })
                .collect();
            Schema { preds }
        })
    }

    pub fn get(&self, name: &str) -> Option<&PredicateSig> {
        self.preds.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.preds.contains_key(name)
    }

    /// Predicates in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &PredicateSig> {
        self.preds.values()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }
}
