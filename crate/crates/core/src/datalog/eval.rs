//! Semi-naive bottom-up evaluation.
//!
//! Each stratum runs one full round, then repeats rounds in which every
//! clause is re-joined once per recursive body literal, with that literal
//! restricted to the rows added in the previous round. Relations are
//! append-only, so a round's delta is a contiguous row range.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use super::ir::{Atom, Clause, Term};
use super::relation::{Database, Relation};
use super::stratify::Stratified;
use super::DatalogError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Src {
    Slot(usize),
    Const(u32),
}

#[derive(Debug, Clone)]
struct CAtom {
    pred: usize,
    args: Vec<Src>,
}

#[derive(Debug, Clone)]
struct CClause {
    head_pred: usize,
    head: Vec<usize>,
    slots: usize,
    pos: Vec<CAtom>,
    neg: Vec<CAtom>,
    neqs: Vec<(Src, Src)>,
    /// A positive literal mentions a constant the database does not know,
    /// so the clause can never fire.
    dead: bool,
}

struct SlotMap<'c> {
    slots: HashMap<&'c str, usize>,
}

impl<'c> SlotMap<'c> {
    fn term(&mut self, t: &'c Term, db: &Database) -> Option<Src> {
        match t {
            Term::Var(v) => {
                let n = self.slots.len();
                Some(Src::Slot(*self.slots.entry(v.as_str()).or_insert(n)))
            }
            Term::Const(c) => db.constant(c).map(Src::Const),
        }
    }

    fn atom(&mut self, a: &'c Atom, pred_ids: &HashMap<&str, usize>, db: &Database) -> Option<CAtom> {
        let args: Option<Vec<Src>> = a.args.iter().map(|t| self.term(t, db)).collect();
        Some(CAtom {
            pred: pred_ids[a.pred.as_str()],
            args: args?,
        })
    }
}

fn compile_clause(clause: &Clause, pred_ids: &HashMap<&str, usize>, db: &Database) -> CClause {
    let mut map = SlotMap {
        slots: HashMap::new(),
    };
    let mut dead = false;
    let mut pos = Vec::new();
    for a in clause.positive() {
        match map.atom(a, pred_ids, db) {
            Some(c) => pos.push(c),
            None => dead = true,
        }
    }
    // an unknown constant under negation makes the literal trivially true
    let neg: Vec<CAtom> = clause
        .negative()
        .filter_map(|a| map.atom(a, pred_ids, db))
        .collect();
    let mut neqs = Vec::new();
    for (x, y) in clause.constraints() {
        if let (Term::Const(a), Term::Const(b)) = (x, y) {
            dead |= a == b;
            continue;
        }
        if let (Some(a), Some(b)) = (map.term(x, db), map.term(y, db)) {
            neqs.push((a, b));
        }
    }
    let head = clause
        .head
        .args
        .iter()
        .map(|t| match map.term(t, db) {
            Some(Src::Slot(v)) => v,
            _ => unreachable!("programs reject head constants"),
        })
        .collect();
    CClause {
        head_pred: pred_ids[clause.head.pred.as_str()],
        head,
        slots: map.slots.len(),
        pos,
        neg,
        neqs,
        dead,
    }
}

#[derive(Debug, Clone)]
enum Step {
    Scan {
        pred: usize,
        delta: bool,
        /// Index id and the sources of its key, when any column is bound.
        index: Option<(usize, Vec<Src>)>,
        key_cols: Vec<usize>,
        binds: Vec<(usize, usize)>,
        checks: Vec<(usize, usize)>,
    },
    Neg(CAtom),
    Neq(Src, Src),
}

fn src_bound(s: Src, bound: &[bool]) -> bool {
    match s {
        Src::Const(_) => true,
        Src::Slot(v) => bound[v],
    }
}

/// Orders a clause body for execution: the delta literal first, then
/// greedily the literal with the most bound columns and smallest relation,
/// with negations and disequalities placed as soon as their variables are
/// bound.
fn plan(c: &CClause, delta: Option<usize>, sizes: &[usize]) -> Vec<Step> {
    let mut bound = vec![false; c.slots];
    let mut steps = Vec::new();
    let mut neg_done = vec![false; c.neg.len()];
    let mut neq_done = vec![false; c.neqs.len()];
    let mut remaining: Vec<usize> = (0..c.pos.len()).collect();

    let flush = |bound: &[bool], steps: &mut Vec<Step>, neg_done: &mut [bool], neq_done: &mut [bool]| {
        for (i, n) in c.neqs.iter().enumerate() {
            if !neq_done[i] && src_bound(n.0, bound) && src_bound(n.1, bound) {
                neq_done[i] = true;
                steps.push(Step::Neq(n.0, n.1));
            }
        }
        for (i, a) in c.neg.iter().enumerate() {
            if !neg_done[i] && a.args.iter().all(|&s| src_bound(s, bound)) {
                neg_done[i] = true;
                steps.push(Step::Neg(a.clone()));
            }
        }
    };
    flush(&bound, &mut steps, &mut neg_done, &mut neq_done);

    while !remaining.is_empty() {
        let pick = match delta.and_then(|d| remaining.iter().position(|&i| i == d)) {
            Some(p) => p,
            None => {
                let score = |i: usize| {
                    let a = &c.pos[i];
                    let nb = a.args.iter().filter(|&&s| src_bound(s, &bound)).count();
                    let category = if nb == a.args.len() {
                        0
                    } else if nb > 0 {
                        1
                    } else {
                        2
                    };
                    (category, sizes[a.pred], i)
                };
                (0..remaining.len())
                    .min_by_key(|&p| score(remaining[p]))
                    .expect("non-empty")
            }
        };
        let i = remaining.remove(pick);
        let a = &c.pos[i];
        let mut key_cols = Vec::new();
        let mut key = Vec::new();
        let mut binds = Vec::new();
        let mut checks = Vec::new();
        let mut first_col: HashMap<usize, usize> = HashMap::new();
        for (col, &s) in a.args.iter().enumerate() {
            match s {
                Src::Slot(v) if !bound[v] => match first_col.get(&v) {
                    Some(&fc) => checks.push((col, fc)),
                    None => {
                        first_col.insert(v, col);
                        binds.push((col, v));
                    }
                },
                s => {
                    key_cols.push(col);
                    key.push(s);
                }
            }
        }
        for &(_, v) in &binds {
            bound[v] = true;
        }
        steps.push(Step::Scan {
            pred: a.pred,
            delta: delta == Some(i),
            index: (!key.is_empty()).then_some((usize::MAX, key)),
            key_cols,
            binds,
            checks,
        });
        flush(&bound, &mut steps, &mut neg_done, &mut neq_done);
    }
    steps
}

struct Exec<'a> {
    rels: &'a [Relation],
    limits: &'a [usize],
    delta: &'a [Range<usize>],
    steps: &'a [Step],
    head_pred: usize,
    head: &'a [usize],
    out: &'a mut Derived,
    key_buf: Vec<Vec<u32>>,
}

impl Exec<'_> {
    fn value(s: Src, slots: &[u32]) -> u32 {
        match s {
            Src::Slot(v) => slots[v],
            Src::Const(c) => c,
        }
    }

    fn run(&mut self, i: usize, slots: &mut [u32]) {
        let Some(step) = self.steps.get(i) else {
            let rel = &self.rels[self.head_pred];
            let flat = &mut self.out.flat;
            let start = flat.len();
            flat.extend(self.head.iter().map(|&v| slots[v]));
            if rel.contains(&flat[start..]) {
                flat.truncate(start);
            } else {
                self.out.hits += 1;
            }
            return;
        };
        match step {
            Step::Scan {
                pred,
                delta,
                index,
                binds,
                checks,
                ..
            } => {
                let rel = &self.rels[*pred];
                let range = if *delta {
                    self.delta[*pred].clone()
                } else {
                    0..self.limits[*pred]
                };
                let visit = |this: &mut Self, r: usize, slots: &mut [u32]| {
                    let row = rel.row(r);
                    if checks.iter().any(|&(c, fc)| row[c] != row[fc]) {
                        return;
                    }
                    for &(c, v) in binds {
                        slots[v] = row[c];
                    }
                    this.run(i + 1, slots);
                };
                match index {
                    None => {
                        for r in range {
                            visit(self, r, slots);
                        }
                    }
                    Some((ix, key)) => {
                        let mut buf = std::mem::take(&mut self.key_buf[i]);
                        buf.clear();
                        buf.extend(key.iter().map(|&s| Self::value(s, slots)));
                        let rows = rel.lookup(*ix, &buf);
                        self.key_buf[i] = buf;
                        let lo = rows.partition_point(|&r| (r as usize) < range.start);
                        for &r in &rows[lo..] {
                            if r as usize >= range.end {
                                break;
                            }
                            visit(self, r as usize, slots);
                        }
                    }
                }
            }
            Step::Neg(a) => {
                let tuple: Vec<u32> = a.args.iter().map(|&s| Self::value(s, slots)).collect();
                if !self.rels[a.pred].contains(&tuple) {
                    self.run(i + 1, slots);
                }
            }
            Step::Neq(x, y) => {
                if Self::value(*x, slots) != Self::value(*y, slots) {
                    self.run(i + 1, slots);
                }
            }
        }
    }
}

/// Tuples derived in one round for one head predicate, flattened.
#[derive(Debug, Default)]
struct Derived {
    flat: Vec<u32>,
    hits: usize,
}

/// Runs one round of the given (clause, delta literal) variants and
/// returns the derived tuples per head predicate.
fn round(
    rels: &mut [Relation],
    clauses: &[CClause],
    variants: &[(usize, Option<usize>)],
    delta: &[Range<usize>],
) -> BTreeMap<usize, Derived> {
    let sizes: Vec<usize> = rels.iter().map(Relation::len).collect();
    let mut plans: Vec<(usize, Vec<Step>)> = variants
        .iter()
        .map(|&(ci, d)| (ci, plan(&clauses[ci], d, &sizes)))
        .collect();
    for (_, steps) in &mut plans {
        for step in steps.iter_mut() {
            if let Step::Scan {
                pred,
                index: Some((ix, _)),
                key_cols,
                ..
            } = step
            {
                *ix = rels[*pred].ensure_index(key_cols);
            }
        }
    }
    let rels: &[Relation] = rels;
    let mut out: BTreeMap<usize, Derived> = BTreeMap::new();
    for (ci, steps) in &plans {
        let c = &clauses[*ci];
        let buf = out.entry(c.head_pred).or_default();
        let mut exec = Exec {
            rels,
            limits: &sizes,
            delta,
            steps,
            head_pred: c.head_pred,
            head: &c.head,
            out: buf,
            key_buf: vec![Vec::new(); steps.len()],
        };
        let mut slots = vec![0u32; c.slots];
        exec.run(0, &mut slots);
    }
    out
}

/// Evaluates a stratified program over a database with semi-naive
/// iteration. The result holds every input relation plus the derived ones.
pub fn evaluate(program: &Stratified, db: &Database) -> Result<Database, DatalogError> {
    let mut work = db.clone();
    let prog = program.program();
    for (p, &a) in prog.derived().iter().chain(prog.base()) {
        work.declare(p, a)?;
    }
    let mut map = work.take_relations();
    let names: Vec<String> = map.keys().cloned().collect();
    let pred_ids: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut rels: Vec<Relation> = names
        .iter()
        .map(|n| map.remove(n).expect("listed"))
        .collect();

    for s in 0..program.strata().len() {
        let clauses: Vec<CClause> = program
            .clauses_in(s)
            .map(|c| compile_clause(c, &pred_ids, db))
            .filter(|c| !c.dead)
            .collect();
        let in_stratum: Vec<bool> = {
            let mut v = vec![false; rels.len()];
            for p in &program.strata()[s] {
                v[pred_ids[p.as_str()]] = true;
            }
            v
        };
        let mut variants: Vec<(usize, Option<usize>)> = (0..clauses.len()).map(|i| (i, None)).collect();
        let mut delta: Vec<Range<usize>> = vec![0..0; rels.len()];
        loop {
            let derived = round(&mut rels, &clauses, &variants, &delta);
            for d in delta.iter_mut() {
                *d = 0..0;
            }
            let mut any = false;
            for (pred, d) in derived {
                let rel = &mut rels[pred];
                let start = rel.len();
                let arity = rel.arity();
                if arity == 0 {
                    if d.hits > 0 {
                        rel.insert(&[]);
                    }
                } else {
                    for t in d.flat.chunks(arity) {
                        rel.insert(t);
                    }
                }
                if rel.len() > start {
                    delta[pred] = start..rel.len();
                    any = true;
                }
            }
            if !any {
                break;
            }
            variants.clear();
            for (ci, c) in clauses.iter().enumerate() {
                for (li, a) in c.pos.iter().enumerate() {
                    if in_stratum[a.pred] && !delta[a.pred].is_empty() {
                        variants.push((ci, Some(li)));
                    }
                }
            }
            if variants.is_empty() {
                break;
            }
        }
    }

    let map: BTreeMap<String, Relation> = names.into_iter().zip(rels).collect();
    work.put_relations(map);
    Ok(work)
}
