//! Schema-driven tooling for biomedical knowledge graphs.
//!
//! The crate parses a hierarchical schema of classes, predicates, mixins and
//! associations, materializes its hierarchies into a [`ClosureIndex`],
//! normalizes entity identifiers by per-class prefix preference, validates
//! graphs against the schema and answers small graph queries whose predicates
//! and categories are expanded down the hierarchy.
//!
//! ```
//! use kgschema::{build_closure, expand_predicates, parse_schema, seed};
//!
//! let doc = parse_schema(seed::SEED_SCHEMA).unwrap();
//! let index = build_closure(&doc).unwrap();
//! let expanded = expand_predicates(&index, ["entity_regulates_entity"]).unwrap();
//! assert!(expanded.contains("negatively_regulates"));
//! ```

use std::fmt;

use serde::Serialize;

pub mod hierarchy;
pub mod identifiers;
pub mod kg;
mod parallel;
pub mod query;
pub mod schema;
pub mod seed;
pub mod validation;

pub use hierarchy::{
    build_closure, expand_predicates, is_subclass_of, most_specific_category, ClosureIndex, HierarchyError,
};
pub use identifiers::{contract_iri, expand_iri, parse_curie, Curie, EquivalenceTable, IdentifierError};
pub use kg::{build_graph, Edge, KnowledgeGraph, Node};
pub use query::{expand_query, match_query, parse_query, Binding, QueryGraph};
pub use schema::{effective_slots, parse_schema, serialize_schema, validate_schema, SchemaDocument, SchemaError};
pub use validation::{validate_graph, ValidationReport, Violation, ViolationCode};

/// Severity of a schema or graph violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}
