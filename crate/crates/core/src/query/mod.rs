//! Query graphs: a small textual form, hierarchy expansion and matching.
//!
//! A query is a list of lines. A chain line alternates nodes and edges:
//!
//! ```text
//! NCBIGene:23221 -[entity_regulates_entity|genetically_interacts_with]-> ?g:Gene|Protein -[related_to]-> ?c:SmallMolecule
//! ```
//!
//! A node is a pinned CURIE or `?var`, optionally `?var:Cat1|Cat2`. A pinned
//! node's variable is named by the CURIE text. Lines of the form
//! `EDGE <node> -[p1|p2]-> <node>` add edges outside a chain; blank lines
//! and lines starting with `#` are ignored.

mod matcher;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use thiserror::Error;

use crate::hierarchy::{expand_categories, expand_predicates, ClosureIndex};
use crate::identifiers::{parse_curie, Curie};

pub use matcher::{match_query, Binding, Evidence};

/// Most query nodes a query may have.
pub const MAX_QUERY_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("query is not connected: `{0}` is unreachable from the first node")]
    DisconnectedQuery(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryNode {
    pub id: Option<Curie>,
    pub categories: Option<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryEdge {
    pub subject: String,
    pub predicates: BTreeSet<String>,
    pub object: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryGraph {
    pub qnodes: IndexMap<String, QueryNode>,
    pub qedges: Vec<QueryEdge>,
}

fn syntax(line: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        line,
        message: message.into(),
    }
}

fn split_names(line: usize, list: &str, what: &str) -> Result<BTreeSet<String>, QueryError> {
    let mut out = BTreeSet::new();
    for part in list.split('|') {
        if part.is_empty() {
            return Err(syntax(line, format!("empty {what} in `{list}`")));
        }
        out.insert(part.to_string());
    }
    Ok(out)
}

fn parse_node(line: usize, token: &str) -> Result<(String, QueryNode), QueryError> {
    if let Some(var) = token.strip_prefix('?') {
        let (name, cats) = match var.split_once(':') {
            Some((name, cats)) => (name, Some(split_names(line, cats, "category")?)),
            None => (var, None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(syntax(line, format!("bad variable `{token}`")));
        }
        Ok((
            name.to_string(),
            QueryNode {
                id: None,
                categories: cats,
            },
        ))
    } else {
        let id = parse_curie(token).map_err(|e| syntax(line, e.to_string()))?;
        Ok((
            token.to_string(),
            QueryNode {
                id: Some(id),
                categories: None,
            },
        ))
    }
}

fn parse_edge(line: usize, token: &str) -> Result<BTreeSet<String>, QueryError> {
    let inner = token
        .strip_prefix("-[")
        .and_then(|t| t.strip_suffix("]->"))
        .ok_or_else(|| syntax(line, format!("expected `-[p1|p2]->`, found `{token}`")))?;
    split_names(line, inner, "predicate")
}

impl QueryGraph {
    fn add_node(&mut self, line: usize, name: String, node: QueryNode) -> Result<(), QueryError> {
        match self.qnodes.get_mut(&name) {
            None => {
                self.qnodes.insert(name, node);
            }
            Some(existing) => match (&existing.categories, node.categories) {
                (_, None) => {}
                (None, Some(c)) => existing.categories = Some(c),
                (Some(a), Some(b)) if *a == b => {}
                _ => return Err(syntax(line, format!("conflicting categories for `?{name}`"))),
            },
        }
        Ok(())
    }

    fn add_chain(&mut self, line: usize, tokens: &[&str]) -> Result<(), QueryError> {
        if tokens.len().is_multiple_of(2) {
            return Err(syntax(line, "a chain must start and end with a node"));
        }
        let mut prev = None;
        for pair in tokens.chunks(2) {
            let (name, node) = parse_node(line, pair[0])?;
            self.add_node(line, name.clone(), node)?;
            if let Some((subject, predicates)) = prev.take() {
                self.qedges.push(QueryEdge {
                    subject,
                    predicates,
                    object: name.clone(),
                });
            }
            if let Some(edge) = pair.get(1) {
                prev = Some((name, parse_edge(line, edge)?));
            }
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<(), QueryError> {
        if self.qnodes.is_empty() {
            return Err(syntax(0, "query has no nodes"));
        }
        if self.qnodes.len() > MAX_QUERY_NODES {
            return Err(syntax(
                0,
                format!(
                    "query has {} nodes; at most {MAX_QUERY_NODES} allowed",
                    self.qnodes.len()
                ),
            ));
        }
        let mut reached = vec![false; self.qnodes.len()];
        reached[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for e in &self.qedges {
                let s = self.qnodes.get_index_of(&e.subject).expect("endpoint declared");
                let o = self.qnodes.get_index_of(&e.object).expect("endpoint declared");
                if reached[s] != reached[o] {
                    reached[s] = true;
                    reached[o] = true;
                    changed = true;
                }
            }
        }
        match reached.iter().position(|r| !r) {
            Some(i) => Err(QueryError::DisconnectedQuery(
                self.qnodes.get_index(i).unwrap().0.clone(),
            )),
            None => Ok(()),
        }
    }

    /// Fails on the first predicate or category `index` does not know.
    fn check_names(&self, index: &ClosureIndex) -> Result<(), QueryError> {
        for e in &self.qedges {
            if let Some(p) = e.predicates.iter().find(|p| !index.contains_predicate(p)) {
                return Err(QueryError::UnknownPredicate(p.clone()));
            }
        }
        for n in self.qnodes.values() {
            if let Some(c) = n.categories.iter().flatten().find(|c| !index.contains_class(c)) {
                return Err(QueryError::UnknownClass(c.clone()));
            }
        }
        Ok(())
    }
}

/// Parses query text and checks its names against `index`.
pub fn parse_query(source: &str, index: &ClosureIndex) -> Result<QueryGraph, QueryError> {
    let mut qg = QueryGraph::default();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens[0] == "EDGE" {
            if tokens.len() != 4 {
                return Err(syntax(line, "expected `EDGE <node> -[p]-> <node>`"));
            }
            qg.add_chain(line, &tokens[1..])?;
        } else {
            qg.add_chain(line, &tokens)?;
        }
    }
    qg.check_shape()?;
    qg.check_names(index)?;
    Ok(qg)
}

/// Replaces each edge's predicates with their descendants and each node's
/// categories with their descendants. Mixins expand to the classes that
/// carry them.
pub fn expand_query(qg: &QueryGraph, index: &ClosureIndex) -> Result<QueryGraph, QueryError> {
    let qedges = qg
        .qedges
        .iter()
        .map(|e| {
            let predicates = expand_predicates(index, &e.predicates).map_err(|err| match err {
                crate::HierarchyError::UnknownPredicate(p) => QueryError::UnknownPredicate(p),
                other => QueryError::UnknownPredicate(other.to_string()),
            })?;
            Ok(QueryEdge {
                subject: e.subject.clone(),
                predicates,
                object: e.object.clone(),
            })
        })
        .collect::<Result<_, QueryError>>()?;
    let qnodes = qg
        .qnodes
        .iter()
        .map(|(name, n)| {
            let categories = match &n.categories {
                None => None,
                Some(cats) => Some(expand_categories(index, cats).map_err(|err| match err {
                    crate::HierarchyError::UnknownClass(c) => QueryError::UnknownClass(c),
                    other => QueryError::UnknownClass(other.to_string()),
                })?),
            };
            Ok((
                name.clone(),
                QueryNode {
                    id: n.id.clone(),
                    categories,
                },
            ))
        })
        .collect::<Result<_, QueryError>>()?;
    Ok(QueryGraph { qnodes, qedges })
}
