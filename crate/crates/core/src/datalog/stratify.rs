use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::ir::{Clause, Program, Term};
use super::DatalogError;

/// Range restriction: every variable of the head, of a negated literal or
/// of a disequality must occur in some positive body literal. Returns the
/// lexicographically smallest offending variable.
pub fn check_safety(clause: &Clause) -> Result<(), String> {
    let bound: BTreeSet<&str> = clause.positive().flat_map(|a| a.vars()).collect();
    let mut needed: BTreeSet<&str> = clause.head.vars().collect();
    needed.extend(clause.negative().flat_map(|a| a.vars()));
    for (x, y) in clause.constraints() {
        needed.extend([x, y].into_iter().filter_map(Term::as_var));
    }
    match needed.into_iter().find(|v| !bound.contains(v)) {
        Some(v) => Err(v.to_owned()),
        None => Ok(()),
    }
}

/// A program whose clauses are all safe, partitioned into evaluation strata.
#[derive(Debug, Clone)]
pub struct Stratified {
    program: Program,
    strata: Vec<Vec<String>>,
    stratum_of: BTreeMap<String, usize>,
}

impl Stratified {
    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Derived predicates per stratum, lowest first.
    pub fn strata(&self) -> &[Vec<String>] {
        &self.strata
    }

    pub fn stratum_of(&self, pred: &str) -> Option<usize> {
        self.stratum_of.get(pred).copied()
    }

    /// Clauses whose head lies in stratum `i`, in program order.
    pub fn clauses_in(&self, i: usize) -> impl Iterator<Item = &Clause> {
        self.program
            .clauses()
            .iter()
            .filter(move |c| self.stratum_of[&c.head.pred] == i)
    }

    /// Clause IR dump: clauses grouped by stratum, each group introduced by
    /// a `% stratum N` comment line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.strata.len() {
            out.push_str(&format!("% stratum {i}\n"));
            for c in self.clauses_in(i) {
                out.push_str(&c.to_string());
                out.push('\n');
            }
        }
        out
    }
}

/// Checks safety of every clause, then assigns strata so that negated
/// dependencies sit strictly lower and positive ones no higher. Query
/// predicates are lifted above all non-query predicates.
pub fn stratify(program: &Program) -> Result<Stratified, DatalogError> {
    for c in program.clauses() {
        if let Err(var) = check_safety(c) {
            return Err(DatalogError::UnsafeVariable {
                var,
                clause: c.to_string(),
            });
        }
    }

    let mut graph: DiGraph<&str, bool> = DiGraph::new();
    let nodes: BTreeMap<&str, NodeIndex> = program
        .derived()
        .keys()
        .map(|p| (p.as_str(), graph.add_node(p.as_str())))
        .collect();
    // base predicates live below every stratum; negating one forces the
    // head up by one before compaction
    let mut floor: HashMap<&str, usize> = HashMap::new();
    for c in program.clauses() {
        let head = nodes[c.head.pred.as_str()];
        for l in c.literals() {
            match nodes.get(l.atom.pred.as_str()) {
                Some(&dep) => match graph.find_edge(dep, head) {
                    // a negative mark wins over a positive one
                    Some(e) => graph[e] |= l.negated,
                    None => {
                        graph.add_edge(dep, head, l.negated);
                    }
                },
                None if l.negated => {
                    floor.insert(c.head.pred.as_str(), 1);
                }
                None => {}
            }
        }
    }

    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0usize; graph.node_count()];
    for (i, scc) in sccs.iter().enumerate() {
        for &n in scc {
            comp[n.index()] = i;
        }
    }
    for scc in &sccs {
        for &n in scc {
            for e in graph.edges_directed(n, petgraph::Direction::Incoming) {
                use petgraph::visit::EdgeRef;
                if *e.weight() && comp[e.source().index()] == comp[n.index()] {
                    return Err(DatalogError::CyclicNegation {
                        cycle: negative_cycle(&graph, e.source(), n, &comp),
                    });
                }
            }
        }
    }

    // tarjan_scc yields reverse topological order of the condensation
    let mut level = vec![0usize; graph.node_count()];
    for scc in sccs.iter().rev() {
        let mut l = scc
            .iter()
            .map(|n| floor.get(graph[*n]).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        for &n in scc {
            for e in graph.edges_directed(n, petgraph::Direction::Incoming) {
                use petgraph::visit::EdgeRef;
                let src = e.source();
                if comp[src.index()] != comp[n.index()] {
                    l = l.max(level[src.index()] + usize::from(*e.weight()));
                }
            }
        }
        for &n in scc {
            level[n.index()] = l;
        }
    }

    let queries = program.queries();
    if !queries.is_empty() {
        for e in graph.edge_indices() {
            let (src, dst) = graph.edge_endpoints(e).expect("valid edge");
            if queries.contains(graph[src]) && !queries.contains(graph[dst]) {
                return Err(DatalogError::QueryDependency {
                    from: graph[dst].to_owned(),
                    to: graph[src].to_owned(),
                });
            }
        }
        let top = nodes
            .iter()
            .filter(|(p, _)| !queries.contains(**p))
            .map(|(_, n)| level[n.index()] + 1)
            .max()
            .unwrap_or(0);
        for (p, n) in &nodes {
            if queries.contains(*p) {
                level[n.index()] += top;
            }
        }
    }

    let used: BTreeSet<usize> = level.iter().copied().collect();
    let compact: BTreeMap<usize, usize> = used.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut strata = vec![Vec::new(); compact.len()];
    let mut stratum_of = BTreeMap::new();
    for (p, n) in &nodes {
        let s = compact[&level[n.index()]];
        strata[s].push((*p).to_owned());
        stratum_of.insert((*p).to_owned(), s);
    }
    Ok(Stratified {
        program: program.clone(),
        strata,
        stratum_of,
    })
}

/// Given a negative edge `src -> dst` inside one component, finds a path
/// from `dst` back to `src` and returns the cycle starting at its smallest
/// predicate name.
fn negative_cycle(
    graph: &DiGraph<&str, bool>,
    src: NodeIndex,
    dst: NodeIndex,
    comp: &[usize],
) -> Vec<String> {
    let mut prev: HashMap<NodeIndex, NodeIndex> = HashMap::new();
    let mut queue = VecDeque::from([dst]);
    let mut seen = BTreeSet::from([dst]);
    while let Some(n) = queue.pop_front() {
        if n == src {
            break;
        }
        let mut next: Vec<NodeIndex> = graph
            .neighbors(n)
            .filter(|m| comp[m.index()] == comp[src.index()])
            .collect();
        next.sort_by_key(|m| graph[*m]);
        for m in next {
            if seen.insert(m) {
                prev.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        cur = prev[&cur];
        path.push(cur);
    }
    // path runs src <- ... <- dst; the cycle in edge order is src, dst, ...
    path.reverse();
    let mut cycle: Vec<String> = std::iter::once(src)
        .chain(path.into_iter().filter(|&n| n != src))
        .map(|n| graph[n].to_owned())
        .collect();
    let min = cycle
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(min);
    cycle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::ir::parse_clauses;

    fn program(text: &str) -> Program {
        Program::new(parse_clauses(text).unwrap()).unwrap()
    }

    fn clause(text: &str) -> Clause {
        parse_clauses(text).unwrap().remove(0)
    }

    #[test]
    fn diamond_clause_is_safe() {
        let c = clause(
            "violate_hicpp_3_3_15(A,B,C,D) :- class(A), class(B), class(C), class(D), B \\= C, direct_base_of(A,B), direct_base_of(A,C), base_of(B,D), base_of(C,D), \\+ virtual_base_of(A,C).",
        );
        assert_eq!(check_safety(&c), Ok(()));
    }

    #[test]
    fn unsafe_negation_and_constraint() {
        assert_eq!(check_safety(&clause("p(X) :- \\+ q(X).")), Err("X".into()));
        assert_eq!(
            check_safety(&clause("p(X) :- q(X), X \\= Y.")),
            Err("Y".into())
        );
        assert_eq!(
            check_safety(&clause("p(Z,B) :- q(A).")),
            Err("B".into())
        );
    }

    #[test]
    fn closure_below_violation() {
        let s = stratify(&program(
            "base_of(X,Y) :- direct_base_of(X,Y).
             base_of(X,Y) :- direct_base_of(X,Z), base_of(Z,Y).
             violate(A,B,C,D) :- class(A), class(B), class(C), class(D), B \\= C,
                 direct_base_of(A,B), direct_base_of(A,C), base_of(B,D), base_of(C,D),
                 \\+ virtual_base_of(A,C).",
        ))
        .unwrap();
        assert_eq!(
            s.strata(),
            &[vec!["base_of".to_string()], vec!["violate".to_string()]]
        );
    }

    #[test]
    fn self_negation_rejected() {
        let e = stratify(&program("p :- \\+ p.")).unwrap_err();
        assert_eq!(e, DatalogError::CyclicNegation { cycle: vec!["p".into()] });
    }

    #[test]
    fn longer_negative_cycle_listed() {
        let e = stratify(&program("b(X) :- d(X), \\+ a(X). a(X) :- c(X), b(X). c(X) :- a(X).")).unwrap_err();
        let DatalogError::CyclicNegation { cycle } = e else {
            panic!("expected cyclic negation");
        };
        assert_eq!(cycle[0], "a");
        assert!(cycle.contains(&"b".to_string()));
    }

    #[test]
    fn negation_free_single_stratum() {
        let s = stratify(&program("p(X) :- q(X). r(X) :- p(X), s(X). p(X) :- r(X).")).unwrap();
        assert_eq!(s.strata().len(), 1);
    }

    #[test]
    fn negated_lower_stratum() {
        let s = stratify(&program("p(X) :- q(X). r(X) :- q(X), \\+ p(X). t(X) :- r(X), \\+ q(X).")).unwrap();
        assert!(s.stratum_of("p").unwrap() < s.stratum_of("r").unwrap());
        assert!(s.stratum_of("r").unwrap() <= s.stratum_of("t").unwrap());
    }

    #[test]
    fn unsafe_clause_rejected() {
        assert!(matches!(
            stratify(&program("p(X) :- \\+ q(X).")),
            Err(DatalogError::UnsafeVariable { .. })
        ));
    }

    #[test]
    fn queries_lifted_above_prelude() {
        let mut p = program("b(X,Y) :- e(X,Y). b(X,Y) :- e(X,Z), b(Z,Y). v(X) :- m(X).");
        p.mark_query("v");
        let s = stratify(&p).unwrap();
        assert!(s.stratum_of("b").unwrap() < s.stratum_of("v").unwrap());
    }

    #[test]
    fn query_dependency_rejected() {
        let mut p = program("v(X) :- m(X). w(X) :- v(X).");
        p.mark_query("v");
        assert!(matches!(stratify(&p), Err(DatalogError::QueryDependency { .. })));
    }
}
