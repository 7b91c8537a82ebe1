use std::collections::BTreeSet;

use serde::Serialize;

use super::{build_graph, KnowledgeGraph};
use crate::hierarchy::ClosureIndex;
use crate::identifiers::{EquivalenceTable, Normalizer};
use crate::schema::SchemaDocument;

/// Counts from [`normalize_graph`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    /// Input nodes folded into another node.
    pub nodes_merged: usize,
    /// Edges that collapsed onto an existing core triple.
    pub edges_deduplicated: usize,
    /// Distinct node ids replaced by a different preferred id.
    pub ids_rewritten: usize,
    /// Distinct node ids found in no clique.
    pub unknown_ids: usize,
    /// Merges that dropped a differing node name.
    pub name_conflicts: usize,
    pub warnings: Vec<String>,
}

/// Rewrites every node and edge endpoint to its preferred identifier and
/// merges what collides.
pub fn normalize_graph(
    kg: &KnowledgeGraph,
    table: &EquivalenceTable,
    doc: &SchemaDocument,
    index: &ClosureIndex,
) -> (KnowledgeGraph, NormalizationReport) {
    let normalizer = Normalizer::new(table, doc, index);
    normalize_graph_with(kg, &normalizer)
}

/// [`normalize_graph`] with a prepared [`Normalizer`].
pub fn normalize_graph_with(kg: &KnowledgeGraph, normalizer: &Normalizer<'_>) -> (KnowledgeGraph, NormalizationReport) {
    let mut report = NormalizationReport {
        warnings: normalizer.warnings().to_vec(),
        ..Default::default()
    };
    let mut nodes = Vec::with_capacity(kg.node_count());
    for node in kg.nodes() {
        let mut node = node.clone();
        match normalizer.lookup(&node.id) {
            Some(preferred) if *preferred != node.id => {
                report.ids_rewritten += 1;
                node.id = preferred.clone();
            }
            Some(_) => {}
            None => report.unknown_ids += 1,
        }
        nodes.push(node);
    }
    let mut dangling_unknown = BTreeSet::new();
    let edges: Vec<_> = kg
        .all_edges()
        .map(|edge| {
            let mut edge = edge.clone();
            for end in [&mut edge.subject, &mut edge.object] {
                match normalizer.lookup(end) {
                    Some(p) => *end = p.clone(),
                    None if kg.node(end).is_none() => {
                        dangling_unknown.insert(end.clone());
                    }
                    None => {}
                }
            }
            edge
        })
        .collect();
    report.unknown_ids += dangling_unknown.len();
    let input_edges = kg.edge_count() + kg.dangling().len();
    let out = build_graph(nodes, edges, false).expect("non-strict build cannot fail");
    let stats = out.build_stats();
    report.nodes_merged = stats.nodes_merged;
    report.name_conflicts = stats.name_conflicts;
    report.edges_deduplicated = input_edges - out.edge_count() - out.dangling().len();
    (out, report)
}
