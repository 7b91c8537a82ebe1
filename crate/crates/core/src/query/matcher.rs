//! Backtracking enumeration of query homomorphisms.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::Serialize;

use super::QueryGraph;
use crate::hierarchy::{is_symmetric, ClosureIndex};
use crate::identifiers::Curie;
use crate::kg::{Edge, KnowledgeGraph, HAS_EVIDENCE, PUBLICATIONS};
use crate::parallel::map_chunks;
use crate::schema::SchemaDocument;

/// The graph edge matched by one query edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub matched_predicate: String,
    /// The matched edge as stored, which for a symmetric predicate may run
    /// opposite to the query edge.
    pub subject: Curie,
    pub object: Curie,
    pub publications: BTreeSet<String>,
    pub has_evidence: BTreeSet<String>,
}

/// One solution: a node per query variable and an edge per query edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub assignments: IndexMap<String, Curie>,
    /// Indexed by query edge ordinal.
    pub evidence: Vec<Evidence>,
}

impl Binding {
    fn sort_key(&self) -> (Vec<&Curie>, Vec<(&Curie, &str, &Curie)>) {
        (
            self.assignments.values().collect(),
            self.evidence
                .iter()
                .map(|e| (&e.subject, e.matched_predicate.as_str(), &e.object))
                .collect(),
        )
    }
}

struct Plan<'a> {
    kg: &'a KnowledgeGraph,
    /// Per query node, per graph node: whether the node may bind there.
    allowed: Vec<Vec<bool>>,
    /// Query edges as (subject qnode, object qnode, predicates).
    qedges: Vec<(usize, usize, &'a BTreeSet<String>)>,
    /// Per graph edge: whether its predicate is declared symmetric.
    symmetric: Vec<bool>,
    order: Vec<usize>,
}

#[derive(Clone)]
struct State {
    assign: Vec<Option<usize>>,
    chosen: Vec<usize>,
}

impl Plan<'_> {
    fn extend(&self, depth: usize, state: &mut State, out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        let Some(&qe) = self.order.get(depth) else {
            let nodes = state.assign.iter().map(|a| a.expect("every qnode bound")).collect();
            let mut edges = vec![0; self.qedges.len()];
            for (slot, &qe) in self.order.iter().enumerate() {
                edges[qe] = state.chosen[slot];
            }
            out.push((nodes, edges));
            return;
        };
        let (qs, qo, predicates) = self.qedges[qe];
        // Walk from whichever endpoint is bound; `forward` lists edges read
        // in stored direction, `backward` those read reversed.
        let (anchor, anchor_is_subject) = match (state.assign[qs], state.assign[qo]) {
            (Some(s), _) => (s, true),
            (None, Some(o)) => (o, false),
            (None, None) => unreachable!("plan keeps the query connected"),
        };
        let (forward, backward) = if anchor_is_subject {
            (self.kg.out_edges(anchor), self.kg.in_edges(anchor))
        } else {
            (self.kg.in_edges(anchor), self.kg.out_edges(anchor))
        };
        let other_q = if anchor_is_subject { qo } else { qs };
        for (edges, reversed) in [(forward, false), (backward, true)] {
            for &ei in edges {
                let edge = &self.kg.edges()[ei];
                if !predicates.contains(&edge.predicate) {
                    continue;
                }
                let s = self.kg.node_index(&edge.subject).expect("connected edge");
                let o = self.kg.node_index(&edge.object).expect("connected edge");
                if reversed && (!self.symmetric[ei] || s == o) {
                    continue;
                }
                let far = match (anchor_is_subject, reversed) {
                    (true, false) | (false, true) => o,
                    (true, true) | (false, false) => s,
                };
                let previous = state.assign[other_q];
                match previous {
                    Some(bound) if bound != far => continue,
                    Some(_) => {}
                    None if !self.allowed[other_q][far] => continue,
                    None => state.assign[other_q] = Some(far),
                }
                state.chosen.push(ei);
                self.extend(depth + 1, state, out);
                state.chosen.pop();
                state.assign[other_q] = previous;
            }
        }
    }
}

/// Every assignment of graph nodes to query variables, with one graph edge
/// per query edge, that satisfies an expanded query. Distinct variables may
/// share a node. A graph edge satisfies a query edge read in stored
/// direction, or reversed when its predicate is declared symmetric.
///
/// Results are sorted by bound ids in query-variable order, then by the
/// matched edges. `jobs` threads explore disjoint subtrees.
pub fn match_query(
    qg: &QueryGraph,
    kg: &KnowledgeGraph,
    doc: &SchemaDocument,
    index: &ClosureIndex,
    jobs: usize,
) -> Vec<Binding> {
    if qg.qnodes.is_empty() {
        return Vec::new();
    }
    let closures: Vec<_> = kg
        .nodes()
        .map(|n| index.category_closure(n.categories.iter().map(String::as_str)))
        .collect();
    let allowed: Vec<Vec<bool>> = qg
        .qnodes
        .values()
        .map(|q| {
            let cats = q
                .categories
                .as_ref()
                .map(|c| index.class_set(c.iter().map(String::as_str)));
            kg.nodes()
                .zip(&closures)
                .map(|(n, closure)| {
                    q.id.as_ref().is_none_or(|id| *id == n.id) && cats.as_ref().is_none_or(|c| closure.intersects(c))
                })
                .collect()
        })
        .collect();
    let counts: Vec<usize> = allowed.iter().map(|a| a.iter().filter(|x| **x).count()).collect();
    let qedges: Vec<_> = qg
        .qedges
        .iter()
        .map(|e| {
            (
                qg.qnodes.get_index_of(&e.subject).expect("endpoint declared"),
                qg.qnodes.get_index_of(&e.object).expect("endpoint declared"),
                &e.predicates,
            )
        })
        .collect();

    // Start at the most selective variable, then repeatedly take a query
    // edge touching the bound part, preferring ones whose far end is most
    // selective.
    let start = (0..counts.len()).min_by_key(|&i| (counts[i], i)).expect("nonempty");
    let mut bound = vec![false; counts.len()];
    bound[start] = true;
    let mut order = Vec::with_capacity(qedges.len());
    let mut pending: Vec<usize> = (0..qedges.len()).collect();
    while !pending.is_empty() {
        let pick = pending
            .iter()
            .enumerate()
            .filter(|(_, &qe)| bound[qedges[qe].0] || bound[qedges[qe].1])
            .min_by_key(|(_, &qe)| {
                let (s, o, _) = qedges[qe];
                let cost = match (bound[s], bound[o]) {
                    (true, true) => 0,
                    (true, false) => counts[o] + 1,
                    _ => counts[s] + 1,
                };
                (cost, qe)
            })
            .map(|(slot, _)| slot);
        let Some(slot) = pick else {
            // Disconnected query edges can never all be satisfied from one
            // start; parse_query rejects such queries.
            return Vec::new();
        };
        let qe = pending.remove(slot);
        bound[qedges[qe].0] = true;
        bound[qedges[qe].1] = true;
        order.push(qe);
    }
    if bound.iter().any(|b| !b) {
        return Vec::new();
    }

    let symmetric: Vec<bool> = kg.edges().iter().map(|e| is_symmetric(doc, &e.predicate)).collect();
    let plan = Plan {
        kg,
        allowed,
        qedges,
        symmetric,
        order,
    };
    let roots: Vec<usize> = (0..kg.node_count()).filter(|&n| plan.allowed[start][n]).collect();
    let found = map_chunks(&roots, jobs, |&root| {
        let mut state = State {
            assign: vec![None; qg.qnodes.len()],
            chosen: Vec::with_capacity(plan.order.len()),
        };
        state.assign[start] = Some(root);
        let mut out = Vec::new();
        plan.extend(0, &mut state, &mut out);
        out
    });

    let mut bindings: Vec<Binding> = found
        .into_iter()
        .flatten()
        .map(|(nodes, edges)| Binding {
            assignments: qg
                .qnodes
                .keys()
                .zip(nodes)
                .map(|(name, n)| (name.clone(), kg.node_at(n).id.clone()))
                .collect(),
            evidence: edges.into_iter().map(|ei| evidence(&kg.edges()[ei])).collect(),
        })
        .collect();
    bindings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    bindings
}

fn evidence(edge: &Edge) -> Evidence {
    Evidence {
        matched_predicate: edge.predicate.clone(),
        subject: edge.subject.clone(),
        object: edge.object.clone(),
        publications: edge.values(PUBLICATIONS).iter().cloned().collect(),
        has_evidence: edge.values(HAS_EVIDENCE).iter().cloned().collect(),
    }
}
