//! Bundled fixtures: the seed schema and a small desk-scale graph around
//! RHOBTB2 (NCBIGene:23221).

/// The seed schema, `seed_schema.kgs.yaml`.
pub const SEED_SCHEMA: &str = include_str!("../data/seed_schema.kgs.yaml");

/// Desk graph nodes (TSV).
pub const DESK_NODES: &str = include_str!("../data/desk/nodes.tsv");

/// Desk graph edges (TSV). Chemical-to-gene interaction edges are stored
/// chemical first and reach genes through symmetric predicates.
pub const DESK_EDGES: &str = include_str!("../data/desk/edges.tsv");

/// Equivalence cliques covering the desk graph's identifiers.
pub const DESK_EQUIVALENCES: &str = include_str!("../data/desk/equivalences.tsv");

/// Two-hop query from RHOBTB2 to small molecules.
pub const RHOBTB2_QUERY: &str = include_str!("../data/desk/rhobtb2.query");
