//! Program entities, the base predicate schema and the fact store.
//!
//! A [`FactBase`] is the abstraction of one program: an entity table plus
//! one tuple set per base predicate. It is built mutably (by the extractor
//! or the fact-file reader) and then frozen into a canonical, immutable form
//! that rule evaluation reads from.

mod file;
mod schema;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use file::{format_fact, read_fact_file, write_fact_file, ReadError, ReadErrorKind, HEADER};
pub use schema::{PredicateSig, Schema};

/// Kind of an interned entity. Symbols (names, signatures, access levels)
/// share the table so every argument is a plain ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Class,
    DataMember,
    Function,
    Symbol,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Class => "class",
            EntityKind::DataMember => "data_member",
            EntityKind::Function => "function",
            EntityKind::Symbol => "symbol",
        }
    }

    /// Parses the kinds that may appear in an `entity(...)` declaration.
    pub fn from_decl(s: &str) -> Option<Self> {
        match s {
            "class" => Some(EntityKind::Class),
            "data_member" => Some(EntityKind::DataMember),
            "function" => Some(EntityKind::Function),
            _ => None,
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense ordinal of an interned entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLoc {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceLoc {
    /// Builds a location; `None` unless both line and column are positive.
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Option<Self> {
        if line == 0 || column == 0 {
            return None;
        }
        Some(SourceLoc {
            file: file.into(),
            line,
            column,
        })
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub kind: EntityKind,
    pub name: String,
    pub loc: Option<SourceLoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{pred}` has arity {expected}, got {found} arguments")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {position} of `{pred}` must be a {expected}, got {found}")]
    SortMismatch {
        pred: String,
        position: usize,
        expected: EntityKind,
        found: EntityKind,
    },
    #[error("entity name must not be empty")]
    EmptyName,
}

pub type Tuple = Vec<EntityId>;

/// Schema-checked set of ground facts over an entity table.
#[derive(Debug, Clone)]
pub struct FactBase {
    entities: Vec<Entity>,
    index: HashMap<(EntityKind, String), EntityId>,
    relations: BTreeMap<&'static str, BTreeSet<Tuple>>,
}

impl Default for FactBase {
    fn default() -> Self {
        Self::new()
    }
}

/// Entities and relations by name, independent of ordinal assignment.
type ContentKey<'a> = (BTreeSet<(EntityKind, &'a str, Option<&'a SourceLoc>)>, Vec<BTreeSet<Vec<&'a str>>>);

impl FactBase {
    pub fn new() -> Self {
        let relations = Schema::base()
            .iter()
            .map(|sig| (sig.name, BTreeSet::new()))
            .collect();
        FactBase {
            entities: Vec::new(),
            index: HashMap::new(),
            relations,
        }
    }

    pub fn schema(&self) -> &'static Schema {
        Schema::base()
    }

    /// Returns the id for `(kind, name)`, creating it if needed. The
    /// location is recorded only when the entity is first seen.
    pub fn intern(
        &mut self,
        kind: EntityKind,
        name: &str,
        loc: Option<SourceLoc>,
    ) -> Result<EntityId, FactError> {
        if name.is_empty() {
            return Err(FactError::EmptyName);
        }
        if let Some(&id) = self.index.get(&(kind, name.to_owned())) {
            return Ok(id);
        }
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(Entity {
            kind,
            name: name.to_owned(),
            loc,
        });
        self.index.insert((kind, name.to_owned()), id);
        Ok(id)
    }

    pub fn symbol(&mut self, name: &str) -> Result<EntityId, FactError> {
        self.intern(EntityKind::Symbol, name, None)
    }

    pub fn lookup(&self, kind: EntityKind, name: &str) -> Option<EntityId> {
        self.index.get(&(kind, name.to_owned())).copied()
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.entities[id.index()]
    }

    pub fn name(&self, id: EntityId) -> &str {
        &self.entities[id.index()].name
    }

    pub fn entities(&self) -> impl Iterator<Item = (EntityId, &Entity)> {
        self.entities
            .iter()
            .enumerate()
            .map(|(i, e)| (EntityId(i as u32), e))
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    fn check(&self, predicate: &str, args: &[EntityId]) -> Result<&'static str, FactError> {
        let sig = Schema::base()
            .get(predicate)
            .ok_or_else(|| FactError::UnknownPredicate(predicate.to_owned()))?;
        if sig.arity() != args.len() {
            return Err(FactError::ArityMismatch {
                pred: predicate.to_owned(),
                expected: sig.arity(),
                found: args.len(),
            });
        }
        for (position, (&arg, &expected)) in args.iter().zip(&sig.sorts).enumerate() {
            let found = self.entity(arg).kind;
            if found != expected {
                return Err(FactError::SortMismatch {
                    pred: predicate.to_owned(),
                    position,
                    expected,
                    found,
                });
            }
        }
        Ok(sig.name)
    }

    /// Adds a tuple. Re-asserting an existing tuple is a no-op.
    pub fn assert_fact(&mut self, predicate: &str, args: &[EntityId]) -> Result<(), FactError> {
        let name = self.check(predicate, args)?;
        self.relations
            .get_mut(name)
            .expect("schema predicates are preallocated")
            .insert(args.to_vec());
        Ok(())
    }

    /// Snapshot of a predicate's extension, ordered by ordinal tuple.
    pub fn tuples(&self, predicate: &str) -> Result<BTreeSet<Tuple>, FactError> {
        self.relation(predicate).cloned()
    }

    pub fn relation(&self, predicate: &str) -> Result<&BTreeSet<Tuple>, FactError> {
        self.relations
            .get(predicate)
            .ok_or_else(|| FactError::UnknownPredicate(predicate.to_owned()))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&'static str, &BTreeSet<Tuple>)> {
        self.relations.iter().map(|(k, v)| (*k, v))
    }

    pub fn contains(&self, predicate: &str, args: &[EntityId]) -> bool {
        self.relations
            .get(predicate)
            .is_some_and(|r| r.contains(args))
    }

    pub fn fact_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    /// Copies every entity and tuple of `other` into `self`. Entities
    /// already present keep their first known location.
    pub fn merge(&mut self, other: &FactBase) {
        let remap: Vec<EntityId> = other
            .entities
            .iter()
            .map(|e| {
                let id = self
                    .intern(e.kind, &e.name, e.loc.clone())
                    .expect("names in a fact base are non-empty");
                let slot = &mut self.entities[id.index()].loc;
                if slot.is_none() {
                    *slot = e.loc.clone();
                }
                id
            })
            .collect();
        for (pred, tuples) in &other.relations {
            let target = self.relations.get_mut(pred).expect("same schema");
            for t in tuples {
                target.insert(t.iter().map(|id| remap[id.index()]).collect());
            }
        }
    }

    /// Renumbers ordinals so they follow `(kind, name)` order. Two fact
    /// bases with the same content are identical after canonicalization,
    /// whatever order they were built in.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.entities.len()).collect();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (&self.entities[a], &self.entities[b]);
            (ea.kind, &ea.name).cmp(&(eb.kind, &eb.name))
        });
        let mut remap = vec![EntityId(0); self.entities.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = EntityId(new as u32);
        }
        let mut old_entities: Vec<Option<Entity>> =
            std::mem::take(&mut self.entities).into_iter().map(Some).collect();
        self.entities = order
            .iter()
            .map(|&old| old_entities[old].take().expect("permutation"))
            .collect();
        self.index = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.kind, e.name.clone()), EntityId(i as u32)))
            .collect();
        for tuples in self.relations.values_mut() {
            *tuples = tuples
                .iter()
                .map(|t| t.iter().map(|id| remap[id.index()]).collect())
                .collect();
        }
    }

    /// Ends construction: canonicalizes ordinals and returns a shareable,
    /// immutable handle.
    pub fn freeze(mut self) -> Arc<FactBase> {
        self.canonicalize();
        Arc::new(self)
    }

    /// Checks the schema-totality and entity-table invariants by full scan.
    pub fn validate(&self) -> Result<(), FactError> {
        for (pred, tuples) in &self.relations {
            for t in tuples {
                if t.iter().any(|id| id.index() >= self.entities.len()) {
                    return Err(FactError::UnknownPredicate((*pred).to_owned()));
                }
                self.check(pred, t)?;
            }
        }
        Ok(())
    }

    fn content_key(&self) -> ContentKey<'_> {
        let entities = self
            .entities
            .iter()
            .map(|e| (e.kind, e.name.as_str(), e.loc.as_ref()))
            .collect();
        let relations = self
            .relations
            .values()
            .map(|tuples| {
                tuples
                    .iter()
                    .map(|t| t.iter().map(|&id| self.name(id)).collect())
                    .collect()
            })
            .collect();
        (entities, relations)
    }
}

/// Equality by content: same entities (with locations) and same tuples by
/// name, independent of ordinal assignment.
impl PartialEq for FactBase {
    fn eq(&self, other: &Self) -> bool {
        self.content_key() == other.content_key()
    }
}

impl Eq for FactBase {}
