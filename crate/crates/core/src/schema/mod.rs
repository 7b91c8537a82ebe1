//! Schema metamodel: domain types, the schema file reader/writer, structural
//! validation and slot inheritance.

mod model;
mod parse;
mod serialize;
mod validate;
pub mod yaml;

use std::collections::HashSet;

use thiserror::Error;

pub use model::*;
pub use parse::{parse_schema, parse_schema_with, ParseOptions, MAX_IDENTIFIER_LEN};
pub use serialize::serialize_schema;
pub use validate::{validate_schema, SchemaViolation, SchemaViolationCode};

/// Version of the schema file format read and written by this crate.
pub const SCHEMA_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("syntax error at {line}:{column} near `{token}`: {message}")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },
    #[error("duplicate {kind} `{name}` at line {line}")]
    DuplicateName { kind: String, name: String, line: usize },
    #[error("nesting deeper than {limit} levels at line {line}")]
    NestingTooDeep { line: usize, limit: usize },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
}

/// A non-fatal diagnostic produced while parsing in lax mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

/// All slots applicable to instances of `class_name`.
///
/// Order: the class's own slots, then slots inherited along `is_a` (nearest
/// ancestor first), then slots contributed by mixins of the class and its
/// ancestors, in declaration order. Duplicates keep their first position.
pub fn effective_slots(doc: &SchemaDocument, class_name: &str) -> Result<Vec<String>, SchemaError> {
    if !doc.classes.contains_key(class_name) {
        return Err(SchemaError::UnknownClass(class_name.to_string()));
    }
    let mut out = Vec::new();
    let mut seen_slots = HashSet::new();
    let mut visited = HashSet::new();
    collect_slots(doc, class_name, &mut visited, &mut seen_slots, &mut out);
    Ok(out)
}

fn collect_slots<'a>(
    doc: &'a SchemaDocument,
    class_name: &'a str,
    visited: &mut HashSet<&'a str>,
    seen_slots: &mut HashSet<&'a str>,
    out: &mut Vec<String>,
) {
    let chain = is_a_chain(doc, class_name);
    let mut mixins = Vec::new();
    for class in &chain {
        if !visited.insert(class.name.as_str()) {
            continue;
        }
        for slot in &class.slots {
            if seen_slots.insert(slot.as_str()) {
                out.push(slot.clone());
            }
        }
        mixins.extend(class.mixins.iter().map(String::as_str));
    }
    for mixin in mixins {
        if doc.classes.contains_key(mixin) && !visited.contains(mixin) {
            collect_slots(doc, mixin, visited, seen_slots, out);
        }
    }
}

/// The class followed by its `is_a` ancestors, stopping at a missing parent
/// or a repeated name.
pub(crate) fn is_a_chain<'a>(doc: &'a SchemaDocument, class_name: &str) -> Vec<&'a ClassDefinition> {
    let mut chain: Vec<&ClassDefinition> = Vec::new();
    let mut current = doc.classes.get(class_name);
    while let Some(class) = current {
        if chain.iter().any(|c| c.name == class.name) {
            break;
        }
        chain.push(class);
        current = class.is_a.as_deref().and_then(|p| doc.classes.get(p));
    }
    chain
}
