//! Graph validation against a schema.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::hierarchy::{inherited_domain, inherited_id_prefixes, most_specific_category, ClassSet, ClosureIndex};
use crate::identifiers::{parse_curie, Curie};
use crate::kg::{Edge, EdgeKey, KnowledgeGraph, Node, HAS_EVIDENCE, PUBLICATIONS};
use crate::parallel::map_chunks;
use crate::schema::{serialize_schema, AssociationDefinition, SchemaDocument};
use crate::Severity;

/// Violation codes. Variants are declared in the bytewise order of their
/// codes, so the derived ordering sorts reports by code text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    AbstractMixinInstantiated,
    DanglingEdge,
    DomainViolation,
    IdPrefixNotAllowed,
    MalformedProvenanceCurie,
    MissingRequiredEdgeProperty,
    NoMatchingAssociation,
    RangeViolation,
    UnknownCategory,
    UnknownPredicate,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 10] = [
        ViolationCode::AbstractMixinInstantiated,
        ViolationCode::DanglingEdge,
        ViolationCode::DomainViolation,
        ViolationCode::IdPrefixNotAllowed,
        ViolationCode::MalformedProvenanceCurie,
        ViolationCode::MissingRequiredEdgeProperty,
        ViolationCode::NoMatchingAssociation,
        ViolationCode::RangeViolation,
        ViolationCode::UnknownCategory,
        ViolationCode::UnknownPredicate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::AbstractMixinInstantiated => "ABSTRACT_MIXIN_INSTANTIATED",
            ViolationCode::DanglingEdge => "DANGLING_EDGE",
            ViolationCode::DomainViolation => "DOMAIN_VIOLATION",
            ViolationCode::IdPrefixNotAllowed => "ID_PREFIX_NOT_ALLOWED",
            ViolationCode::MalformedProvenanceCurie => "MALFORMED_PROVENANCE_CURIE",
            ViolationCode::MissingRequiredEdgeProperty => "MISSING_REQUIRED_EDGE_PROPERTY",
            ViolationCode::NoMatchingAssociation => "NO_MATCHING_ASSOCIATION",
            ViolationCode::RangeViolation => "RANGE_VIOLATION",
            ViolationCode::UnknownCategory => "UNKNOWN_CATEGORY",
            ViolationCode::UnknownPredicate => "UNKNOWN_PREDICATE",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::IdPrefixNotAllowed
            | ViolationCode::NoMatchingAssociation
            | ViolationCode::MalformedProvenanceCurie => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a violation is about. Edges are named by their core triple so that
/// reports do not depend on input order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationTarget {
    Node(Curie),
    Edge(EdgeKey),
}

impl fmt::Display for ViolationTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationTarget::Node(id) => write!(f, "{id}"),
            ViolationTarget::Edge(key) => write!(f, "{key}"),
        }
    }
}

impl Serialize for ViolationTarget {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ViolationTarget::Node(id) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("node", id)?;
                map.end()
            }
            ViolationTarget::Edge(key) => {
                let mut map = serializer.serialize_map(Some(3))?;
                map.serialize_entry("subject", &key.subject)?;
                map.serialize_entry("predicate", &key.predicate)?;
                map.serialize_entry("object", &key.object)?;
                map.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub severity: Severity,
    pub subject_of_violation: ViolationTarget,
    pub detail: String,
}

impl Violation {
    fn new(code: ViolationCode, target: ViolationTarget, detail: String) -> Violation {
        Violation {
            code,
            severity: code.severity(),
            subject_of_violation: target,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Sorted by code, then target, then detail.
    pub violations: Vec<Violation>,
    pub counts: BTreeMap<ViolationCode, usize>,
    /// Hex SHA-256 over the canonical schema and the graph's sorted rows.
    pub inputs_hash: String,
}

#[derive(Serialize)]
struct ReportHeader<'a> {
    counts: BTreeMap<&'static str, usize>,
    errors: usize,
    warnings: usize,
    inputs_hash: &'a str,
}

impl ValidationReport {
    pub fn errors(&self) -> usize {
        self.count_severity(Severity::Error)
    }

    pub fn warnings(&self) -> usize {
        self.count_severity(Severity::Warning)
    }

    fn count_severity(&self, severity: Severity) -> usize {
        self.violations.iter().filter(|v| v.severity == severity).count()
    }

    pub fn has_errors(&self) -> bool {
        self.errors() > 0
    }

    /// One header line with counts and the inputs hash, then one line per
    /// violation.
    pub fn to_jsonl(&self) -> String {
        let header = ReportHeader {
            counts: self.counts.iter().map(|(c, n)| (c.as_str(), *n)).collect(),
            errors: self.errors(),
            warnings: self.warnings(),
            inputs_hash: &self.inputs_hash,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for v in &self.violations {
            out.push_str(&serde_json::to_string(v).expect("violation serializes"));
            out.push('\n');
        }
        out
    }
}

/// Per-predicate constraints resolved once per validation run.
struct PredicateRule<'d> {
    domain: Option<(&'d str, Option<usize>)>,
    range: Option<(&'d str, Option<usize>)>,
    /// Associations applicable to the predicate, most specific first.
    associations: Vec<(&'d AssociationDefinition, Option<usize>, Option<usize>)>,
}

struct Validator<'a> {
    doc: &'a SchemaDocument,
    index: &'a ClosureIndex,
    rules: HashMap<&'a str, PredicateRule<'a>>,
}

impl<'a> Validator<'a> {
    fn new(doc: &'a SchemaDocument, index: &'a ClosureIndex) -> Self {
        let mut rules = HashMap::new();
        for slot in doc.predicates() {
            let p = slot.name.as_str();
            if !index.contains_predicate(p) {
                continue;
            }
            let bound = |class: &'a str| (class, index.class_bit(class));
            let mut associations: Vec<_> = doc
                .associations
                .values()
                .filter(|a| index.is_predicate_descendant(p, &a.predicate))
                .map(|a| {
                    let depth = index.class_depth(&a.subject).unwrap_or(0)
                        + index.predicate_depth(&a.predicate).unwrap_or(0)
                        + index.class_depth(&a.object).unwrap_or(0);
                    (depth, a)
                })
                .collect();
            associations.sort_by(|(da, a), (db, b)| db.cmp(da).then_with(|| a.name.as_bytes().cmp(b.name.as_bytes())));
            rules.insert(
                p,
                PredicateRule {
                    domain: inherited_domain(doc, index, p).map(bound),
                    range: crate::hierarchy::inherited_range(doc, index, p).map(bound),
                    associations: associations
                        .into_iter()
                        .map(|(_, a)| (a, index.class_bit(&a.subject), index.class_bit(&a.object)))
                        .collect(),
                },
            );
        }
        Validator { doc, index, rules }
    }

    fn closure(&self, node: &Node) -> ClassSet {
        self.index.category_closure(node.categories.iter().map(String::as_str))
    }

    fn node(&self, node: &Node) -> Vec<Violation> {
        let target = || ViolationTarget::Node(node.id.clone());
        let mut out = Vec::new();
        for c in &node.categories {
            if !self.index.contains_class(c) {
                out.push(Violation::new(
                    ViolationCode::UnknownCategory,
                    target(),
                    format!("category `{c}` is not a schema class"),
                ));
            }
        }
        let known: Vec<&str> = node
            .categories
            .iter()
            .map(String::as_str)
            .filter(|c| self.index.contains_class(c))
            .collect();
        let concrete: Vec<&str> = known.iter().copied().filter(|c| !self.index.is_mixin(c)).collect();
        if !known.is_empty() && concrete.is_empty() {
            out.push(Violation::new(
                ViolationCode::AbstractMixinInstantiated,
                target(),
                format!("categories {} are all mixins", known.join("|")),
            ));
        }
        if let Ok(choice) = most_specific_category(self.index, &concrete) {
            if let Some(allowed) = inherited_id_prefixes(self.doc, self.index, &choice.category) {
                if !allowed.iter().any(|p| p == node.id.prefix()) {
                    out.push(Violation::new(
                        ViolationCode::IdPrefixNotAllowed,
                        target(),
                        format!(
                            "prefix `{}` is not among {} id_prefixes [{}]",
                            node.id.prefix(),
                            choice.category,
                            allowed.join(", ")
                        ),
                    ));
                }
            }
        }
        out
    }

    /// Checks that need no endpoint: predicate legality and provenance shape.
    fn edge_intrinsic(&self, edge: &Edge, out: &mut Vec<Violation>) {
        let target = || ViolationTarget::Edge(edge.key());
        if !self.rules.contains_key(edge.predicate.as_str()) {
            out.push(Violation::new(
                ViolationCode::UnknownPredicate,
                target(),
                format!("`{}` is not a schema predicate", edge.predicate),
            ));
        }
        for value in edge.values(PUBLICATIONS) {
            if parse_curie(value).is_err() {
                out.push(Violation::new(
                    ViolationCode::MalformedProvenanceCurie,
                    target(),
                    format!("{PUBLICATIONS} value `{value}` is not a CURIE"),
                ));
            }
        }
        for value in edge.values(HAS_EVIDENCE) {
            let declared = value
                .split_once(':')
                .is_some_and(|(prefix, _)| self.doc.prefixes.contains_key(prefix));
            if declared && parse_curie(value).is_err() {
                out.push(Violation::new(
                    ViolationCode::MalformedProvenanceCurie,
                    target(),
                    format!("{HAS_EVIDENCE} value `{value}` is not a CURIE"),
                ));
            }
        }
    }

    fn edge(&self, edge: &Edge, subject: &ClassSet, object: &ClassSet) -> Vec<Violation> {
        let mut out = Vec::new();
        self.edge_intrinsic(edge, &mut out);
        let Some(rule) = self.rules.get(edge.predicate.as_str()) else {
            return out;
        };
        let target = || ViolationTarget::Edge(edge.key());
        let admits = |set: &ClassSet, bit: Option<usize>| bit.is_some_and(|b| set.contains_bit(b));
        if let Some((domain, bit)) = rule.domain {
            if !admits(subject, bit) {
                out.push(Violation::new(
                    ViolationCode::DomainViolation,
                    target(),
                    format!("subject {} is not a {domain}", edge.subject),
                ));
            }
        }
        if let Some((range, bit)) = rule.range {
            if !admits(object, bit) {
                out.push(Violation::new(
                    ViolationCode::RangeViolation,
                    target(),
                    format!("object {} is not a {range}", edge.object),
                ));
            }
        }
        let matched = rule
            .associations
            .iter()
            .find(|(_, s, o)| admits(subject, *s) && admits(object, *o));
        match matched {
            None => out.push(Violation::new(
                ViolationCode::NoMatchingAssociation,
                target(),
                format!("no association admits `{}` between these categories", edge.predicate),
            )),
            Some((assoc, _, _)) => {
                for required in &assoc.required_edge_properties {
                    if edge.values(required).is_empty() {
                        out.push(Violation::new(
                            ViolationCode::MissingRequiredEdgeProperty,
                            target(),
                            format!("{} requires `{required}`", assoc.name),
                        ));
                    }
                }
            }
        }
        out
    }

    fn dangling(&self, edge: &Edge, kg: &KnowledgeGraph) -> Vec<Violation> {
        let missing: Vec<&str> = [&edge.subject, &edge.object]
            .into_iter()
            .filter(|id| kg.node(id).is_none())
            .map(Curie::as_str)
            .collect();
        let mut out = vec![Violation::new(
            ViolationCode::DanglingEdge,
            ViolationTarget::Edge(edge.key()),
            format!("missing node {}", missing.join(" and ")),
        )];
        self.edge_intrinsic(edge, &mut out);
        out
    }
}

/// Violations for one node.
pub fn validate_node(node: &Node, doc: &SchemaDocument, index: &ClosureIndex) -> Vec<Violation> {
    let mut out = Validator::new(doc, index).node(node);
    out.sort();
    out
}

/// Violations for one edge, resolving its endpoints in `kg`.
pub fn validate_edge(edge: &Edge, kg: &KnowledgeGraph, doc: &SchemaDocument, index: &ClosureIndex) -> Vec<Violation> {
    let v = Validator::new(doc, index);
    let mut out = match (kg.node(&edge.subject), kg.node(&edge.object)) {
        (Some(s), Some(o)) => v.edge(edge, &v.closure(s), &v.closure(o)),
        _ => v.dangling(edge, kg),
    };
    out.sort();
    out
}

/// Validates every node and edge, using up to `jobs` threads. The report
/// does not depend on `jobs` or on input order.
pub fn validate_graph(
    kg: &KnowledgeGraph,
    doc: &SchemaDocument,
    index: &ClosureIndex,
    jobs: usize,
) -> ValidationReport {
    let v = Validator::new(doc, index);
    let nodes: Vec<&Node> = kg.nodes().collect();
    let closures = map_chunks(&nodes, jobs, |n| v.closure(n));
    let mut violations: Vec<Violation> = map_chunks(&nodes, jobs, |n| v.node(n)).into_iter().flatten().collect();
    let edge_results = map_chunks(kg.edges(), jobs, |e| {
        let s = kg.node_index(&e.subject).expect("connected edge");
        let o = kg.node_index(&e.object).expect("connected edge");
        v.edge(e, &closures[s], &closures[o])
    });
    violations.extend(edge_results.into_iter().flatten());
    for e in kg.dangling() {
        violations.extend(v.dangling(e, kg));
    }
    violations.sort();
    violations.dedup();
    let mut counts = BTreeMap::new();
    for violation in &violations {
        *counts.entry(violation.code).or_insert(0) += 1;
    }
    ValidationReport {
        violations,
        counts,
        inputs_hash: inputs_hash(kg, doc),
    }
}

/// Digest of the canonical schema text and the graph's rows, each row with
/// sorted fields and the rows themselves sorted.
pub fn inputs_hash(kg: &KnowledgeGraph, doc: &SchemaDocument) -> String {
    fn props(p: &crate::kg::Properties) -> String {
        p.iter()
            .map(|(k, v)| {
                let mut v = v.clone();
                v.sort();
                format!("{k}={}", v.join("|"))
            })
            .collect::<Vec<_>>()
            .join("\t")
    }
    let mut node_rows: Vec<String> = kg
        .nodes()
        .map(|n| {
            let mut cats = n.categories.clone();
            cats.sort();
            format!(
                "{}\t{}\t{}\t{}",
                n.id,
                cats.join("|"),
                n.name.as_deref().unwrap_or(""),
                props(&n.properties)
            )
        })
        .collect();
    node_rows.sort();
    let mut edge_rows: Vec<String> = kg
        .all_edges()
        .map(|e| format!("{}\t{}\t{}\t{}", e.subject, e.predicate, e.object, props(&e.properties)))
        .collect();
    edge_rows.sort();

    let mut hasher = Sha256::new();
    hasher.update(serialize_schema(doc).as_bytes());
    for section in [node_rows, edge_rows] {
        hasher.update(b"\0");
        for row in section {
            hasher.update(row.as_bytes());
            hasher.update(b"\n");
        }
    }
    hex::encode(hasher.finalize())
}
