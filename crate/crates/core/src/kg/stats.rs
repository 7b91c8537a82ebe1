use std::collections::BTreeMap;

use serde::Serialize;

use super::KnowledgeGraph;
use crate::hierarchy::{most_specific_category, ClosureIndex};

/// Bucket for nodes with no category known to the schema.
pub const UNKNOWN_CATEGORY_LABEL: &str = "(unknown)";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StatsReport {
    pub nodes: usize,
    pub edges: usize,
    pub dangling_edges: usize,
    /// Node counts keyed by most specific category.
    pub nodes_by_category: BTreeMap<String, usize>,
    pub edges_by_predicate: BTreeMap<String, usize>,
}

/// Node and edge totals, broken down by most specific category and by
/// predicate. Dangling edges are counted apart and not per predicate.
pub fn graph_stats(kg: &KnowledgeGraph, index: &ClosureIndex) -> StatsReport {
    let mut report = StatsReport {
        nodes: kg.node_count(),
        edges: kg.edge_count(),
        dangling_edges: kg.dangling().len(),
        ..Default::default()
    };
    for node in kg.nodes() {
        let known = node.categories.iter().filter(|c| index.contains_class(c));
        let label = most_specific_category(index, known)
            .map(|c| c.category)
            .unwrap_or_else(|_| UNKNOWN_CATEGORY_LABEL.to_string());
        *report.nodes_by_category.entry(label).or_default() += 1;
    }
    for edge in kg.edges() {
        *report.edges_by_predicate.entry(edge.predicate.clone()).or_default() += 1;
    }
    report
}
