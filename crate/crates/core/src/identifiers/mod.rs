//! CURIE handling and node normalization over equivalence cliques.

mod curie;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::hierarchy::{inherited_id_prefixes, most_specific_category, ClosureIndex, HierarchyError};
use crate::schema::SchemaDocument;

pub use curie::{contract_iri, expand_iri, parse_curie, Curie};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifierError {
    #[error("malformed CURIE `{text}`: {reason}")]
    MalformedCurie { text: String, reason: &'static str },
    #[error("undeclared prefix `{0}`")]
    UndeclaredPrefix(String),
    #[error("no declared IRI base matches `{0}`")]
    NoMatchingBase(String),
    #[error("empty clique")]
    EmptyClique,
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("`{curie}` appears in cliques on lines {first_line} and {second_line}")]
    OverlappingCliques {
        curie: String,
        first_line: usize,
        second_line: usize,
    },
}

impl From<HierarchyError> for IdentifierError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::UnknownClass(c) => IdentifierError::UnknownClass(c),
            HierarchyError::EmptySet => IdentifierError::EmptyClique,
            other => IdentifierError::UnknownClass(other.to_string()),
        }
    }
}

/// A set of identifiers denoting one entity, with its categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clique {
    pub members: BTreeSet<Curie>,
    pub categories: BTreeSet<String>,
}

/// Disjoint equivalence cliques with a member lookup.
#[derive(Debug, Clone, Default)]
pub struct EquivalenceTable {
    cliques: Vec<Clique>,
    member_index: HashMap<Curie, usize>,
}

impl EquivalenceTable {
    /// Builds a table from cliques, rejecting overlaps. Line numbers in the
    /// error are clique ordinals plus one.
    pub fn from_cliques(cliques: Vec<Clique>) -> Result<Self, IdentifierError> {
        let mut table = EquivalenceTable::default();
        for (i, clique) in cliques.into_iter().enumerate() {
            table.push(clique, i + 1, |_| i + 1)?;
        }
        Ok(table)
    }

    fn push(&mut self, clique: Clique, line: usize, line_of: impl Fn(usize) -> usize) -> Result<(), IdentifierError> {
        if clique.members.is_empty() {
            return Err(IdentifierError::Syntax {
                line,
                message: "clique has no members".into(),
            });
        }
        if clique.categories.is_empty() {
            return Err(IdentifierError::Syntax {
                line,
                message: "clique has no categories".into(),
            });
        }
        let ordinal = self.cliques.len();
        for m in &clique.members {
            if let Some(&other) = self.member_index.get(m) {
                return Err(IdentifierError::OverlappingCliques {
                    curie: m.to_string(),
                    first_line: line_of(other),
                    second_line: line,
                });
            }
        }
        for m in &clique.members {
            self.member_index.insert(m.clone(), ordinal);
        }
        self.cliques.push(clique);
        Ok(())
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn clique_of(&self, curie: &Curie) -> Option<usize> {
        self.member_index.get(curie).copied()
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }
}

/// Reads cliques, one per line: `Cat1|Cat2<TAB>curie1|curie2`. Blank lines
/// and lines starting with `#` are skipped.
pub fn load_equivalences(source: &str) -> Result<EquivalenceTable, IdentifierError> {
    let mut table = EquivalenceTable::default();
    let mut lines_by_clique = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let syntax = |message: String| IdentifierError::Syntax { line, message };
        let (cats, curies) = raw
            .split_once('\t')
            .ok_or_else(|| syntax("expected `categories<TAB>curies`".into()))?;
        if curies.contains('\t') {
            return Err(syntax("too many columns".into()));
        }
        let categories = split_nonempty(cats).map_err(syntax)?;
        let mut members = BTreeSet::new();
        for text in split_nonempty(curies).map_err(syntax)? {
            members.insert(parse_curie(&text).map_err(|e| syntax(e.to_string()))?);
        }
        lines_by_clique.push(line);
        table.push(
            Clique {
                members,
                categories: categories.into_iter().collect(),
            },
            line,
            |ordinal| lines_by_clique[ordinal],
        )?;
    }
    Ok(table)
}

fn split_nonempty(cell: &str) -> Result<Vec<String>, String> {
    cell.split('|')
        .map(|part| {
            if part.is_empty() {
                Err(format!("empty entry in `{cell}`"))
            } else {
                Ok(part.to_string())
            }
        })
        .collect()
}

/// How [`preferred_identifier`] made its choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    /// The chosen prefix sits at this position of the inherited id_prefixes.
    Ranked(usize),
    /// No member's prefix is listed; the smallest text form was chosen.
    NoPreferenceMatch,
}

/// Picks the preferred member of a clique for `category`.
///
/// Uses the nearest nonempty `id_prefixes` list along the category's
/// ancestors. The member whose prefix is listed earliest wins, with ties
/// broken by bytewise local id. When no prefix is listed, the bytewise
/// smallest text form wins.
pub fn preferred_identifier<'c>(
    members: impl IntoIterator<Item = &'c Curie>,
    category: &str,
    doc: &SchemaDocument,
    index: &ClosureIndex,
) -> Result<(Curie, Preference), IdentifierError> {
    if !index.contains_class(category) {
        return Err(IdentifierError::UnknownClass(category.to_string()));
    }
    let preferences = inherited_id_prefixes(doc, index, category).unwrap_or(&[]);
    let mut best_ranked: Option<(usize, &Curie)> = None;
    let mut smallest: Option<&Curie> = None;
    for m in members {
        if smallest.is_none_or(|s| m < s) {
            smallest = Some(m);
        }
        if let Some(rank) = preferences.iter().position(|p| p == m.prefix()) {
            let better = match best_ranked {
                None => true,
                Some((r, b)) => (rank, m.local_id().as_bytes()) < (r, b.local_id().as_bytes()),
            };
            if better {
                best_ranked = Some((rank, m));
            }
        }
    }
    match (best_ranked, smallest) {
        (Some((rank, c)), _) => Ok((c.clone(), Preference::Ranked(rank))),
        (None, Some(c)) => Ok((c.clone(), Preference::NoPreferenceMatch)),
        (None, None) => Err(IdentifierError::EmptyClique),
    }
}

/// Normalizes `curie` to its clique's preferred identifier. Identifiers
/// outside every clique are returned unchanged.
pub fn normalize_curie(
    table: &EquivalenceTable,
    curie: &Curie,
    doc: &SchemaDocument,
    index: &ClosureIndex,
) -> Result<Curie, IdentifierError> {
    let Some(ordinal) = table.clique_of(curie) else {
        return Ok(curie.clone());
    };
    let clique = &table.cliques[ordinal];
    let category = most_specific_category(index, &clique.categories)?.category;
    Ok(preferred_identifier(&clique.members, &category, doc, index)?.0)
}

/// Precomputed preferred identifiers for every clique of a table.
#[derive(Debug, Clone)]
pub struct Normalizer<'t> {
    table: &'t EquivalenceTable,
    preferred: Vec<Curie>,
    warnings: Vec<String>,
}

impl<'t> Normalizer<'t> {
    /// Categories missing from the schema are skipped with a warning. A
    /// clique left with no known category keeps its smallest member.
    pub fn new(table: &'t EquivalenceTable, doc: &SchemaDocument, index: &ClosureIndex) -> Self {
        let mut preferred = Vec::with_capacity(table.len());
        let mut warnings = Vec::new();
        for clique in &table.cliques {
            let first = clique.members.first().expect("cliques are nonempty");
            let known: Vec<&String> = clique.categories.iter().filter(|c| index.contains_class(c)).collect();
            if known.len() < clique.categories.len() {
                warnings.push(format!("clique {first} has categories missing from the schema"));
            }
            let Ok(choice) = most_specific_category(index, known) else {
                preferred.push(first.clone());
                continue;
            };
            if let Some(tied) = &choice.incomparable {
                warnings.push(format!(
                    "clique {first} has incomparable categories {}; using {}",
                    tied.join("|"),
                    choice.category
                ));
            }
            let (curie, _) = preferred_identifier(&clique.members, &choice.category, doc, index)
                .expect("category is known and clique is nonempty");
            preferred.push(curie);
        }
        Normalizer {
            table,
            preferred,
            warnings,
        }
    }

    /// The preferred identifier for `curie`, or `None` if it is in no clique.
    pub fn lookup(&self, curie: &Curie) -> Option<&Curie> {
        self.table.clique_of(curie).map(|i| &self.preferred[i])
    }

    pub fn normalize(&self, curie: &Curie) -> Curie {
        self.lookup(curie).unwrap_or(curie).clone()
    }

    /// Category conflicts found while resolving cliques.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
