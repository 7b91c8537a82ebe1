//! In-memory knowledge graph with TSV/JSONL exchange and whole-graph
//! normalization.

mod io;
mod normalize;
mod stats;

use std::collections::{BTreeMap, HashMap};

use indexmap::IndexMap;
use thiserror::Error;

use crate::hierarchy::ClosureIndex;
use crate::identifiers::Curie;

pub use io::{
    read_edges, read_edges_jsonl, read_edges_tsv, read_nodes, read_nodes_jsonl, read_nodes_tsv, write_edges,
    write_edges_jsonl, write_edges_tsv, write_nodes, write_nodes_jsonl, write_nodes_tsv, Format,
};
pub use normalize::{normalize_graph, normalize_graph_with, NormalizationReport};
pub use stats::{graph_stats, StatsReport, UNKNOWN_CATEGORY_LABEL};

/// Property name for edge provenance publications.
pub const PUBLICATIONS: &str = "publications";
/// Property name for edge evidence codes.
pub const HAS_EVIDENCE: &str = "has_evidence";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KgError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("edge {subject} {predicate} {object} references a missing node")]
    DanglingEdge {
        subject: String,
        predicate: String,
        object: String,
    },
}

/// Multivalued properties keyed by slot name. Values keep first-seen order
/// and hold no duplicates.
pub type Properties = BTreeMap<String, Vec<String>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: Curie,
    pub categories: Vec<String>,
    pub name: Option<String>,
    pub properties: Properties,
}

impl Node {
    pub fn new<S: Into<String>>(id: Curie, categories: impl IntoIterator<Item = S>) -> Node {
        let mut node = Node {
            id,
            categories: Vec::new(),
            name: None,
            properties: Properties::new(),
        };
        for c in categories {
            push_unique(&mut node.categories, c.into());
        }
        node
    }

    /// Whether merging `other` into this node would drop a different name.
    fn merge(&mut self, other: Node) -> bool {
        for c in other.categories {
            push_unique(&mut self.categories, c);
        }
        merge_properties(&mut self.properties, other.properties);
        match (&self.name, other.name) {
            (None, theirs) => {
                self.name = theirs;
                false
            }
            (Some(ours), Some(theirs)) => *ours != theirs,
            (Some(_), None) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub subject: Curie,
    pub predicate: String,
    pub object: Curie,
    pub properties: Properties,
}

impl Edge {
    pub fn new(subject: Curie, predicate: impl Into<String>, object: Curie) -> Edge {
        Edge {
            subject,
            predicate: predicate.into(),
            object,
            properties: Properties::new(),
        }
    }

    pub fn values(&self, property: &str) -> &[String] {
        self.properties.get(property).map_or(&[], Vec::as_slice)
    }

    /// The core triple, which identifies the edge.
    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            subject: self.subject.clone(),
            predicate: self.predicate.clone(),
            object: self.object.clone(),
        }
    }
}

/// An edge's core triple. Orders by subject, predicate, object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub subject: Curie,
    pub predicate: String,
    pub object: Curie,
}

impl std::fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

fn push_unique(list: &mut Vec<String>, value: String) {
    if !list.contains(&value) {
        list.push(value);
    }
}

fn merge_properties(into: &mut Properties, from: Properties) {
    for (key, values) in from {
        let slot = into.entry(key).or_default();
        for v in values {
            push_unique(slot, v);
        }
    }
}

/// Merge counts from [`build_graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub nodes_merged: usize,
    pub edges_merged: usize,
    pub name_conflicts: usize,
}

/// Nodes, deduplicated edges and adjacency lists.
///
/// Edges whose endpoints are missing are kept apart in [`dangling`](Self::dangling)
/// and take no part in adjacency.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    nodes: IndexMap<Curie, Node>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    dangling: Vec<Edge>,
    stats: BuildStats,
}

/// Deduplicates nodes by id and edges by core triple, merging by union.
/// The first non-empty name seen for a node wins. With `strict`, the first
/// edge referencing a missing node is an error.
pub fn build_graph(nodes: Vec<Node>, edges: Vec<Edge>, strict: bool) -> Result<KnowledgeGraph, KgError> {
    let mut kg = KnowledgeGraph::default();
    for node in nodes {
        match kg.nodes.get_mut(&node.id) {
            Some(existing) => {
                kg.stats.nodes_merged += 1;
                if existing.merge(node) {
                    kg.stats.name_conflicts += 1;
                }
            }
            None => {
                kg.nodes.insert(node.id.clone(), node);
            }
        }
    }
    kg.out_edges = vec![Vec::new(); kg.nodes.len()];
    kg.in_edges = vec![Vec::new(); kg.nodes.len()];

    let mut seen: HashMap<(usize, String, usize), usize> = HashMap::with_capacity(edges.len());
    let mut seen_dangling: HashMap<EdgeKey, usize> = HashMap::new();
    for edge in edges {
        let s = kg.nodes.get_index_of(&edge.subject);
        let o = kg.nodes.get_index_of(&edge.object);
        let (Some(s), Some(o)) = (s, o) else {
            if strict {
                return Err(KgError::DanglingEdge {
                    subject: edge.subject.to_string(),
                    predicate: edge.predicate,
                    object: edge.object.to_string(),
                });
            }
            match seen_dangling.get(&edge.key()) {
                Some(&i) => {
                    kg.stats.edges_merged += 1;
                    merge_properties(&mut kg.dangling[i].properties, edge.properties);
                }
                None => {
                    seen_dangling.insert(edge.key(), kg.dangling.len());
                    kg.dangling.push(edge);
                }
            }
            continue;
        };
        let key = (s, edge.predicate.clone(), o);
        match seen.get(&key) {
            Some(&i) => {
                kg.stats.edges_merged += 1;
                merge_properties(&mut kg.edges[i].properties, edge.properties);
            }
            None => {
                let ordinal = kg.edges.len();
                seen.insert(key, ordinal);
                kg.out_edges[s].push(ordinal);
                kg.in_edges[o].push(ordinal);
                kg.edges.push(edge);
            }
        }
    }
    Ok(kg)
}

impl KnowledgeGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: &Curie) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn node_index(&self, id: &Curie) -> Option<usize> {
        self.nodes.get_index_of(id)
    }

    pub fn node_at(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    /// Nodes in first-seen order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &Node> {
        self.nodes.values()
    }

    /// Edges in first-seen order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Ordinals of edges leaving the node at `index`.
    pub fn out_edges(&self, index: usize) -> &[usize] {
        &self.out_edges[index]
    }

    /// Ordinals of edges entering the node at `index`.
    pub fn in_edges(&self, index: usize) -> &[usize] {
        &self.in_edges[index]
    }

    /// Edges with a missing endpoint.
    pub fn dangling(&self) -> &[Edge] {
        &self.dangling
    }

    pub fn build_stats(&self) -> BuildStats {
        self.stats
    }

    /// All edges, connected ones first, then dangling ones.
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().chain(&self.dangling)
    }

    /// Adds every class ancestor of each node's known categories.
    pub fn close_categories(&mut self, index: &ClosureIndex) {
        for node in self.nodes.values_mut() {
            let own = node.categories.clone();
            for c in own {
                for a in index.class_ancestors(&c).unwrap_or(&[]) {
                    push_unique(&mut node.categories, a.clone());
                }
            }
        }
    }

    /// Consumes the graph, returning its nodes and all edges.
    pub fn into_parts(self) -> (Vec<Node>, Vec<Edge>) {
        let mut edges = self.edges;
        edges.extend(self.dangling);
        (self.nodes.into_values().collect(), edges)
    }
}

/// Graphs are equal when they have the same nodes and the same edges,
/// irrespective of order.
impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        fn sorted(edges: &[Edge]) -> Vec<&Edge> {
            let mut v: Vec<&Edge> = edges.iter().collect();
            v.sort_by(|a, b| (&a.subject, &a.predicate, &a.object).cmp(&(&b.subject, &b.predicate, &b.object)));
            v
        }
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().all(|(id, n)| other.nodes.get(id) == Some(n))
            && sorted(&self.edges) == sorted(&other.edges)
            && sorted(&self.dangling) == sorted(&other.dangling)
    }
}

impl Eq for KnowledgeGraph {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifiers::parse_curie;

    fn c(s: &str) -> Curie {
        parse_curie(s).unwrap()
    }

    fn with_pub(mut e: Edge, p: &str) -> Edge {
        e.properties.insert(PUBLICATIONS.into(), vec![p.into()]);
        e
    }

    #[test]
    fn merges_nodes_by_union() {
        let mut a = Node::new(c("X:1"), ["Gene"]);
        a.name = Some("first".into());
        let mut b = Node::new(c("X:1"), ["Protein"]);
        b.name = Some("second".into());
        let kg = build_graph(vec![a, b], vec![], false).unwrap();
        let n = kg.node(&c("X:1")).unwrap();
        assert_eq!(n.categories, ["Gene", "Protein"]);
        assert_eq!(n.name.as_deref(), Some("first"));
        assert_eq!(kg.build_stats().name_conflicts, 1);
    }

    #[test]
    fn merges_edges_by_triple() {
        let nodes = vec![Node::new(c("X:1"), ["Gene"]), Node::new(c("X:2"), ["Gene"])];
        let e = Edge::new(c("X:1"), "related_to", c("X:2"));
        let kg = build_graph(nodes, vec![with_pub(e.clone(), "PMID:1"), with_pub(e, "PMID:2")], false).unwrap();
        assert_eq!(kg.edge_count(), 1);
        assert_eq!(kg.edges()[0].values(PUBLICATIONS), ["PMID:1", "PMID:2"]);
        assert_eq!(kg.out_edges(0), [0]);
        assert_eq!(kg.in_edges(1), [0]);
    }

    #[test]
    fn dangling_edges_are_kept_apart() {
        let nodes = vec![Node::new(c("X:1"), ["Gene"])];
        let e = Edge::new(c("X:1"), "related_to", c("X:9"));
        let kg = build_graph(nodes.clone(), vec![e.clone()], false).unwrap();
        assert_eq!((kg.edge_count(), kg.dangling().len()), (0, 1));
        assert!(matches!(
            build_graph(nodes, vec![e], true),
            Err(KgError::DanglingEdge { .. })
        ));
    }

    #[test]
    fn equality_ignores_order() {
        let nodes = vec![Node::new(c("X:1"), ["Gene"]), Node::new(c("X:2"), ["Gene"])];
        let e1 = Edge::new(c("X:1"), "related_to", c("X:2"));
        let e2 = Edge::new(c("X:2"), "related_to", c("X:1"));
        let a = build_graph(nodes.clone(), vec![e1.clone(), e2.clone()], false).unwrap();
        let mut rev = nodes;
        rev.reverse();
        let b = build_graph(rev, vec![e2, e1], false).unwrap();
        assert_eq!(a, b);
    }
}
