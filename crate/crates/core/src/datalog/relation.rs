use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hasher;

use hashbrown::HashTable;
use rustc_hash::FxHasher;

use super::DatalogError;
use crate::facts::{EntityKind, FactBase};

fn hash_row(vals: impl Iterator<Item = u32>) -> u64 {
    let mut h = FxHasher::default();
    for v in vals {
        h.write_u32(v);
    }
    h.finish()
}

#[derive(Debug, Clone)]
struct Index {
    cols: Vec<usize>,
    upto: usize,
    /// Buckets of row ids sharing a projection, ascending within a bucket.
    table: HashTable<Vec<u32>>,
}

/// Append-only tuple set with lazily maintained hash indexes on column
/// subsets. Rows are stored flat; row ids are insertion positions.
#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    data: Vec<u32>,
    len: usize,
    set: HashTable<u32>,
    indexes: Vec<Index>,
}

impl Relation {
    pub fn new(arity: usize) -> Self {
        Relation {
            arity,
            data: Vec::new(),
            len: 0,
            set: HashTable::new(),
            indexes: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.len).map(move |i| self.row(i))
    }

    pub fn contains(&self, tuple: &[u32]) -> bool {
        let h = hash_row(tuple.iter().copied());
        self.set
            .find(h, |&r| self.row(r as usize) == tuple)
            .is_some()
    }

    /// Inserts a tuple, returning whether it was new.
    pub fn insert(&mut self, tuple: &[u32]) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        let h = hash_row(tuple.iter().copied());
        let (data, arity) = (&self.data, self.arity);
        let row = |r: u32| &data[r as usize * arity..(r as usize + 1) * arity];
        if self.set.find(h, |&r| row(r) == tuple).is_some() {
            return false;
        }
        let id = self.len as u32;
        self.data.extend_from_slice(tuple);
        self.len += 1;
        let (data, arity) = (&self.data, self.arity);
        self.set.insert_unique(h, id, |&r| {
            hash_row(data[r as usize * arity..(r as usize + 1) * arity].iter().copied())
        });
        true
    }

    /// Returns the id of an index on `cols`, bringing it up to date with
    /// every row inserted so far.
    pub fn ensure_index(&mut self, cols: &[usize]) -> usize {
        let pos = match self.indexes.iter().position(|ix| ix.cols == cols) {
            Some(p) => p,
            None => {
                self.indexes.push(Index {
                    cols: cols.to_vec(),
                    upto: 0,
                    table: HashTable::new(),
                });
                self.indexes.len() - 1
            }
        };
        let (data, arity, len) = (&self.data, self.arity, self.len);
        let ix = &mut self.indexes[pos];
        let project = |r: u32, c: usize| data[r as usize * arity + c];
        for r in ix.upto as u32..len as u32 {
            let h = hash_row(ix.cols.iter().map(|&c| project(r, c)));
            let cols = &ix.cols;
            let same = |bucket: &Vec<u32>| cols.iter().all(|&c| project(bucket[0], c) == project(r, c));
            match ix.table.find_mut(h, same) {
                Some(bucket) => bucket.push(r),
                None => {
                    ix.table.insert_unique(h, vec![r], |bucket| {
                        hash_row(cols.iter().map(|&c| project(bucket[0], c)))
                    });
                }
            }
        }
        ix.upto = len;
        pos
    }

    /// Row ids whose projection on the index columns equals `key`.
    pub fn lookup(&self, index: usize, key: &[u32]) -> &[u32] {
        let ix = &self.indexes[index];
        let h = hash_row(key.iter().copied());
        ix.table
            .find(h, |bucket| {
                let r = self.row(bucket[0] as usize);
                ix.cols.iter().zip(key).all(|(&c, &k)| r[c] == k)
            })
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn to_set(&self) -> BTreeSet<Vec<u32>> {
        self.iter().map(<[u32]>::to_vec).collect()
    }

    /// Tuples in lexicographic ordinal order.
    pub fn sorted(&self) -> Vec<Vec<u32>> {
        self.to_set().into_iter().collect()
    }
}

/// Named relations over entity ordinals, plus the symbol table used to
/// resolve clause constants.
#[derive(Debug, Clone, Default)]
pub struct Database {
    relations: BTreeMap<String, Relation>,
    constants: HashMap<String, u32>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    /// Base relations and symbol constants of a fact base.
    pub fn from_facts(fb: &FactBase) -> Self {
        let mut db = Database::new();
        for (pred, tuples) in fb.relations() {
            let arity = fb.schema().get(pred).expect("schema predicate").arity();
            let rel = db.relations.entry(pred.to_owned()).or_insert(Relation::new(arity));
            let mut buf = Vec::with_capacity(arity);
            for t in tuples {
                buf.clear();
                buf.extend(t.iter().map(|id| id.0));
                rel.insert(&buf);
            }
        }
        for (id, e) in fb.entities() {
            if e.kind == EntityKind::Symbol {
                db.constants.insert(e.name.clone(), id.0);
            }
        }
        db
    }

    pub fn declare(&mut self, pred: &str, arity: usize) -> Result<(), DatalogError> {
        let rel = self
            .relations
            .entry(pred.to_owned())
            .or_insert_with(|| Relation::new(arity));
        if rel.arity() != arity {
            return Err(DatalogError::ArityConflict {
                pred: pred.to_owned(),
                expected: rel.arity(),
                found: arity,
            });
        }
        Ok(())
    }

    pub fn insert(&mut self, pred: &str, tuple: &[u32]) -> Result<bool, DatalogError> {
        self.declare(pred, tuple.len())?;
        Ok(self
            .relations
            .get_mut(pred)
            .expect("declared")
            .insert(tuple))
    }

    pub fn define_constant(&mut self, name: impl Into<String>, id: u32) {
        self.constants.insert(name.into(), id);
    }

    pub fn constant(&self, name: &str) -> Option<u32> {
        self.constants.get(name).copied()
    }

    pub fn relation(&self, pred: &str) -> Option<&Relation> {
        self.relations.get(pred)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    /// All tuples of `pred`, sorted lexicographically by ordinal.
    pub fn query(&self, pred: &str) -> Result<Vec<Vec<u32>>, DatalogError> {
        self.relations
            .get(pred)
            .map(Relation::sorted)
            .ok_or_else(|| DatalogError::UnknownPredicate(pred.to_owned()))
    }

    pub fn to_sets(&self) -> BTreeMap<String, BTreeSet<Vec<u32>>> {
        self.relations
            .iter()
            .map(|(k, r)| (k.clone(), r.to_set()))
            .collect()
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }

    pub(crate) fn take_relations(&mut self) -> BTreeMap<String, Relation> {
        std::mem::take(&mut self.relations)
    }

    pub(crate) fn put_relations(&mut self, relations: BTreeMap<String, Relation>) {
        self.relations = relations;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_semantics_and_lookup() {
        let mut r = Relation::new(2);
        assert!(r.insert(&[1, 2]));
        assert!(!r.insert(&[1, 2]));
        assert!(r.insert(&[1, 3]));
        assert!(r.insert(&[2, 3]));
        assert_eq!(r.len(), 3);
        let ix = r.ensure_index(&[0]);
        assert_eq!(r.lookup(ix, &[1]), &[0, 1]);
        r.insert(&[1, 9]);
        let ix = r.ensure_index(&[0]);
        assert_eq!(r.lookup(ix, &[1]), &[0, 1, 3]);
        let iy = r.ensure_index(&[1]);
        assert_eq!(r.lookup(iy, &[3]), &[1, 2]);
        assert!(r.lookup(iy, &[7]).is_empty());
        assert!(r.contains(&[2, 3]));
        assert!(!r.contains(&[3, 2]));
    }

    #[test]
    fn zero_arity() {
        let mut r = Relation::new(0);
        assert!(r.insert(&[]));
        assert!(!r.insert(&[]));
        assert_eq!(r.len(), 1);
        assert!(r.contains(&[]));
    }

    #[test]
    fn database_arity_checked() {
        let mut db = Database::new();
        db.insert("e", &[1, 2]).unwrap();
        assert!(db.insert("e", &[1]).is_err());
        assert_eq!(db.query("e").unwrap(), vec![vec![1, 2]]);
        assert!(db.query("f").is_err());
    }
}
