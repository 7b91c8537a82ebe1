use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::model::*;
use super::{effective_slots, is_a_chain};
use crate::identifiers::parse_curie;
use crate::Severity;

/// Stable codes for structural problems in a schema document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemaViolationCode {
    UnknownReference,
    CycleInIsA,
    CycleInMixins,
    MixinNotMixin,
    MixinHierarchyMismatch,
    PredicateNotUnderRelatedTo,
    SlotKindMismatch,
    UndeclaredPrefix,
    DuplicateIdPrefix,
    NameClash,
    MalformedMappingTarget,
    AssociationPredicateNotPredicate,
    EdgePropertyKindMismatch,
    AssociationWidensParent,
    MixinSlotShadowed,
    NamingConvention,
}

impl SchemaViolationCode {
    pub fn as_str(self) -> &'static str {
        use SchemaViolationCode::*;
        match self {
            UnknownReference => "UNKNOWN_REFERENCE",
            CycleInIsA => "CYCLE_IN_IS_A",
            CycleInMixins => "CYCLE_IN_MIXINS",
            MixinNotMixin => "MIXIN_NOT_MIXIN",
            MixinHierarchyMismatch => "MIXIN_HIERARCHY_MISMATCH",
            PredicateNotUnderRelatedTo => "PREDICATE_NOT_UNDER_RELATED_TO",
            SlotKindMismatch => "SLOT_KIND_MISMATCH",
            UndeclaredPrefix => "UNDECLARED_PREFIX",
            DuplicateIdPrefix => "DUPLICATE_ID_PREFIX",
            NameClash => "NAME_CLASH",
            MalformedMappingTarget => "MALFORMED_MAPPING_TARGET",
            AssociationPredicateNotPredicate => "ASSOCIATION_PREDICATE_NOT_PREDICATE",
            EdgePropertyKindMismatch => "EDGE_PROPERTY_KIND_MISMATCH",
            AssociationWidensParent => "ASSOCIATION_WIDENS_PARENT",
            MixinSlotShadowed => "MIXIN_SLOT_SHADOWED",
            NamingConvention => "NAMING_CONVENTION",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            SchemaViolationCode::MixinSlotShadowed | SchemaViolationCode::NamingConvention => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for SchemaViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SchemaViolation {
    pub code: SchemaViolationCode,
    pub severity: Severity,
    /// Name of the offending element.
    pub element: String,
    pub detail: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} `{}`: {}", self.severity, self.code, self.element, self.detail)
    }
}

struct Collector(Vec<SchemaViolation>);

impl Collector {
    fn push(&mut self, code: SchemaViolationCode, element: &str, detail: impl Into<String>) {
        self.0.push(SchemaViolation {
            code,
            severity: code.severity(),
            element: element.to_string(),
            detail: detail.into(),
        });
    }
}

/// Checks the structural rules of a schema. An empty result means the
/// document is valid. Output is sorted, so it does not depend on declaration
/// order.
pub fn validate_schema(doc: &SchemaDocument) -> Vec<SchemaViolation> {
    use SchemaViolationCode::*;
    let mut out = Collector(Vec::new());

    for name in doc.classes.keys() {
        if doc.slots.contains_key(name) {
            out.push(NameClash, name, "name is used by both a class and a slot");
        }
    }

    let class_cycles = cycles(doc.classes.keys(), |c| doc.classes[c].is_a.iter().cloned().collect());
    let class_cycle_members: HashSet<&str> = class_cycles.iter().flatten().map(String::as_str).collect();
    for cycle in &class_cycles {
        out.push(
            CycleInIsA,
            &cycle[0],
            format!("class is_a cycle: {}", cycle.join(" -> ")),
        );
    }
    if class_cycles.is_empty() {
        let mixin_cycles = cycles(doc.classes.keys(), |c| {
            let class = &doc.classes[c];
            class.is_a.iter().chain(&class.mixins).cloned().collect()
        });
        for cycle in &mixin_cycles {
            out.push(CycleInMixins, &cycle[0], format!("mixin cycle: {}", cycle.join(" -> ")));
        }
    }

    for class in doc.classes.values() {
        check_class(doc, class, &mut out);
        if !class_cycle_members.contains(class.name.as_str()) {
            check_mixin_shadowing(doc, class, &mut out);
        }
    }

    let slot_cycles = cycles(doc.slots.keys(), |s| doc.slots[s].is_a.iter().cloned().collect());
    let slot_cycle_members: HashSet<&str> = slot_cycles.iter().flatten().map(String::as_str).collect();
    for cycle in &slot_cycles {
        out.push(
            CycleInIsA,
            &cycle[0],
            format!("slot is_a cycle: {}", cycle.join(" -> ")),
        );
    }
    for slot in doc.slots.values() {
        check_slot(doc, slot, &slot_cycle_members, &mut out);
    }

    let assoc_cycles = cycles(doc.associations.keys(), |a| {
        doc.associations[a].is_a.iter().cloned().collect()
    });
    for cycle in &assoc_cycles {
        out.push(
            CycleInIsA,
            &cycle[0],
            format!("association is_a cycle: {}", cycle.join(" -> ")),
        );
    }
    let acyclic = class_cycles.is_empty() && slot_cycles.is_empty() && assoc_cycles.is_empty();
    for assoc in doc.associations.values() {
        check_association(doc, assoc, acyclic, &mut out);
    }

    let mut violations = out.0;
    violations.sort();
    violations.dedup();
    violations
}

fn check_class(doc: &SchemaDocument, class: &ClassDefinition, out: &mut Collector) {
    use SchemaViolationCode::*;
    let name = class.name.as_str();
    if !is_upper_camel(name) {
        out.push(NamingConvention, name, "class names should be UpperCamelCase");
    }
    if let Some(parent) = &class.is_a {
        match doc.classes.get(parent) {
            None => out.push(UnknownReference, name, format!("is_a names unknown class `{parent}`")),
            Some(p) if p.is_mixin != class.is_mixin => out.push(
                MixinHierarchyMismatch,
                name,
                format!("is_a `{parent}` crosses between mixin and instantiable hierarchies"),
            ),
            Some(_) => {}
        }
    }
    for mixin in &class.mixins {
        match doc.classes.get(mixin) {
            None => out.push(UnknownReference, name, format!("mixins names unknown class `{mixin}`")),
            Some(m) if !m.is_mixin => out.push(MixinNotMixin, name, format!("`{mixin}` is not declared is_mixin")),
            Some(_) => {}
        }
    }
    for slot in &class.slots {
        if !doc.slots.contains_key(slot) {
            out.push(UnknownReference, name, format!("slots names unknown slot `{slot}`"));
        }
    }
    let mut seen = HashSet::new();
    for prefix in &class.id_prefixes {
        if !seen.insert(prefix) {
            out.push(
                DuplicateIdPrefix,
                name,
                format!("id_prefixes lists `{prefix}` more than once"),
            );
        }
        if !doc.prefixes.contains_key(prefix) {
            out.push(
                UndeclaredPrefix,
                name,
                format!("id_prefixes uses undeclared prefix `{prefix}`"),
            );
        }
    }
    check_mappings(name, &class.mappings, out);
}

fn check_mappings(element: &str, mappings: &[Mapping], out: &mut Collector) {
    for m in mappings {
        if let Err(e) = parse_curie(&m.target) {
            out.push(
                SchemaViolationCode::MalformedMappingTarget,
                element,
                format!("{} mapping target: {e}", m.relation),
            );
        }
    }
}

fn check_mixin_shadowing(doc: &SchemaDocument, class: &ClassDefinition, out: &mut Collector) {
    let contributions: Vec<(&str, Vec<String>)> = class
        .mixins
        .iter()
        .filter(|m| doc.is_mixin(m))
        .filter_map(|m| effective_slots(doc, m).ok().map(|slots| (m.as_str(), slots)))
        .collect();
    for (i, (winner, slots)) in contributions.iter().enumerate() {
        for (loser, other) in &contributions[i + 1..] {
            if winner == loser {
                continue;
            }
            for slot in slots.iter().filter(|s| other.contains(s)) {
                out.push(
                    SchemaViolationCode::MixinSlotShadowed,
                    &class.name,
                    format!("slot `{slot}` is contributed by `{winner}` and `{loser}`; `{winner}` wins"),
                );
            }
        }
    }
}

fn check_slot(doc: &SchemaDocument, slot: &SlotDefinition, cyclic: &HashSet<&str>, out: &mut Collector) {
    use SchemaViolationCode::*;
    let name = slot.name.as_str();
    if !is_snake(name) {
        out.push(NamingConvention, name, "slot names should be snake_case");
    }
    if let Some(parent) = &slot.is_a {
        match doc.slots.get(parent) {
            None => out.push(UnknownReference, name, format!("is_a names unknown slot `{parent}`")),
            Some(p) if p.slot_kind != slot.slot_kind => out.push(
                SlotKindMismatch,
                name,
                format!("{} slot is_a {} slot `{parent}`", slot.slot_kind, p.slot_kind),
            ),
            Some(_) => {}
        }
    }
    if let Some(domain) = &slot.domain {
        if !doc.classes.contains_key(domain) {
            out.push(UnknownReference, name, format!("domain names unknown class `{domain}`"));
        }
    }
    if let Some(range) = &slot.range {
        if !doc.classes.contains_key(range) && !doc.types.contains_key(range) {
            out.push(
                UnknownReference,
                name,
                format!("range names unknown class or type `{range}`"),
            );
        }
    }
    check_mappings(name, &slot.mappings, out);

    if slot.slot_kind != SlotKind::Predicate || cyclic.contains(name) {
        return;
    }
    if name == ROOT_PREDICATE {
        if slot.is_a.is_some() {
            out.push(
                PredicateNotUnderRelatedTo,
                name,
                "the root predicate may not have a parent",
            );
        }
        return;
    }
    // Walk up; unknown parents and cycles are reported elsewhere.
    let mut current = slot;
    let mut steps = 0;
    loop {
        match current.is_a.as_deref() {
            Some(ROOT_PREDICATE) if doc.predicate(ROOT_PREDICATE).is_some() => return,
            Some(parent) => match doc.slots.get(parent) {
                Some(p) if !cyclic.contains(parent) && steps <= doc.slots.len() => {
                    current = p;
                    steps += 1;
                }
                Some(_) => return,
                None => return,
            },
            None => {
                out.push(
                    PredicateNotUnderRelatedTo,
                    name,
                    format!("predicate does not descend from `{ROOT_PREDICATE}`"),
                );
                return;
            }
        }
    }
}

fn check_association(doc: &SchemaDocument, assoc: &AssociationDefinition, acyclic: bool, out: &mut Collector) {
    use SchemaViolationCode::*;
    let name = assoc.name.as_str();
    if !is_upper_camel(name) || !name.ends_with("Association") {
        out.push(
            NamingConvention,
            name,
            "association names should be UpperCamelCase ending in `Association`",
        );
    }
    for (role, class) in [("subject", &assoc.subject), ("object", &assoc.object)] {
        if !doc.classes.contains_key(class) {
            out.push(UnknownReference, name, format!("{role} names unknown class `{class}`"));
        }
    }
    match doc.slots.get(&assoc.predicate) {
        None => out.push(
            UnknownReference,
            name,
            format!("predicate names unknown slot `{}`", assoc.predicate),
        ),
        Some(s) if s.slot_kind != SlotKind::Predicate => out.push(
            AssociationPredicateNotPredicate,
            name,
            format!("`{}` is a {} slot", assoc.predicate, s.slot_kind),
        ),
        Some(_) => {}
    }
    for prop in &assoc.required_edge_properties {
        match doc.slots.get(prop) {
            None => out.push(
                UnknownReference,
                name,
                format!("required edge property `{prop}` is not a slot"),
            ),
            Some(s) if s.slot_kind != SlotKind::EdgeProperty => out.push(
                EdgePropertyKindMismatch,
                name,
                format!("required edge property `{prop}` is a {} slot", s.slot_kind),
            ),
            Some(_) => {}
        }
    }
    for prop in &assoc.optional_edge_properties {
        if !doc.slots.contains_key(prop) {
            out.push(
                UnknownReference,
                name,
                format!("optional edge property `{prop}` is not a slot"),
            );
        }
    }
    let Some(parent_name) = &assoc.is_a else {
        return;
    };
    let Some(parent) = doc.associations.get(parent_name) else {
        out.push(
            UnknownReference,
            name,
            format!("is_a names unknown association `{parent_name}`"),
        );
        return;
    };
    if !acyclic {
        return;
    }
    let narrows = [
        ("subject", class_reaches(doc, &assoc.subject, &parent.subject)),
        ("predicate", slot_reaches(doc, &assoc.predicate, &parent.predicate)),
        ("object", class_reaches(doc, &assoc.object, &parent.object)),
    ];
    for (role, ok) in narrows {
        if !ok {
            out.push(
                AssociationWidensParent,
                name,
                format!("{role} is not a specialization of the {role} of `{parent_name}`"),
            );
        }
    }
}

/// Whether `from` reaches `to` through `is_a` and mixin links (reflexive).
fn class_reaches(doc: &SchemaDocument, from: &str, to: &str) -> bool {
    let mut stack = vec![from];
    let mut seen = HashSet::new();
    while let Some(c) = stack.pop() {
        if c == to {
            return true;
        }
        if !seen.insert(c) {
            continue;
        }
        for class in is_a_chain(doc, c) {
            if class.name == to {
                return true;
            }
            stack.extend(class.mixins.iter().map(String::as_str));
        }
    }
    false
}

fn slot_reaches(doc: &SchemaDocument, from: &str, to: &str) -> bool {
    let mut current = Some(from);
    let mut steps = 0;
    while let Some(s) = current {
        if s == to {
            return true;
        }
        steps += 1;
        if steps > doc.slots.len() {
            return false;
        }
        current = doc.slots.get(s).and_then(|d| d.is_a.as_deref());
    }
    false
}

/// Strongly connected components that contain a cycle, each sorted, in
/// sorted order. `edges` may name nodes outside `nodes`; those are ignored.
fn cycles<'a, I, F>(nodes: I, edges: F) -> Vec<Vec<String>>
where
    I: IntoIterator<Item = &'a String>,
    F: Fn(&str) -> Vec<String>,
{
    let names: Vec<&str> = nodes.into_iter().map(String::as_str).collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let adj: Vec<Vec<usize>> = names
        .iter()
        .map(|n| edges(n).iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();

    // Iterative Tarjan.
    let n = names.len();
    let mut idx = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut found = Vec::new();
    for root in 0..n {
        if idx[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        while let Some((v, next)) = work.pop() {
            if next == 0 {
                idx[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(next) {
                work.push((v, next + 1));
                if idx[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(idx[w]);
                }
                continue;
            }
            if low[v] == idx[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                if component.len() > 1 || adj[v].contains(&v) {
                    let mut members: Vec<String> = component.iter().map(|&i| names[i].to_string()).collect();
                    members.sort();
                    found.push(members);
                }
            }
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
        }
    }
    found.sort();
    found
}

fn is_upper_camel(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase()) && name.chars().all(|c| c.is_ascii_alphanumeric())
}

fn is_snake(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_lowercase())
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_schema;

    fn codes(src: &str) -> Vec<&'static str> {
        validate_schema(&parse_schema(src).unwrap())
            .iter()
            .map(|v| v.code.as_str())
            .collect()
    }

    const HEAD: &str = "name: t\nversion: v\n";

    #[test]
    fn predicate_two_cycle() {
        let src = format!(
            "{HEAD}slots:\n  related_to:\n    slot_kind: predicate\n  affects:\n    is_a: regulates\n    slot_kind: predicate\n  regulates:\n    is_a: affects\n    slot_kind: predicate\n"
        );
        assert_eq!(codes(&src), vec!["CYCLE_IN_IS_A"]);
    }

    #[test]
    fn orphan_predicate() {
        let src =
            format!("{HEAD}slots:\n  related_to:\n    slot_kind: predicate\n  treats:\n    slot_kind: predicate\n");
        assert_eq!(codes(&src), vec!["PREDICATE_NOT_UNDER_RELATED_TO"]);
    }

    #[test]
    fn root_with_parent() {
        let src = format!(
            "{HEAD}slots:\n  related_to:\n    is_a: top\n    slot_kind: predicate\n  top:\n    slot_kind: predicate\n"
        );
        let c = codes(&src);
        assert!(c.contains(&"PREDICATE_NOT_UNDER_RELATED_TO"));
    }

    #[test]
    fn class_reference_errors() {
        let src = format!(
            "{HEAD}prefixes:\n  X: http://x/\nclasses:\n  A:\n    is_a: Missing\n    mixins:\n      - B\n    id_prefixes:\n      - X\n      - Y\n      - X\n  B:\n    slots:\n      - nope\n"
        );
        assert_eq!(
            codes(&src),
            vec![
                "UNKNOWN_REFERENCE",
                "UNKNOWN_REFERENCE",
                "MIXIN_NOT_MIXIN",
                "UNDECLARED_PREFIX",
                "DUPLICATE_ID_PREFIX"
            ]
        );
    }

    #[test]
    fn mixin_crossing_and_cycles() {
        let src = format!(
            "{HEAD}classes:\n  A:\n    is_a: M\n  M:\n    is_mixin: true\n    mixins:\n      - N\n  N:\n    is_mixin: true\n    mixins:\n      - M\n"
        );
        assert_eq!(codes(&src), vec!["CYCLE_IN_MIXINS", "MIXIN_HIERARCHY_MISMATCH"]);
    }

    #[test]
    fn naming_warnings() {
        let src = format!(
            "{HEAD}classes:\n  bad_class:\n    description: x\nslots:\n  BadSlot:\n    slot_kind: node_property\n"
        );
        let v = validate_schema(&parse_schema(&src).unwrap());
        assert_eq!(v.len(), 2);
        assert!(v
            .iter()
            .all(|v| v.code == SchemaViolationCode::NamingConvention && v.severity == Severity::Warning));
    }

    #[test]
    fn association_checks() {
        let src = format!(
            "{HEAD}classes:\n  Thing:\n    description: t\n  Sub:\n    is_a: Thing\nslots:\n  related_to:\n    slot_kind: predicate\n  child_of:\n    is_a: related_to\n    slot_kind: predicate\n  note:\n    slot_kind: node_property\nassociations:\n  Association:\n    subject: Sub\n    predicate: child_of\n    object: Sub\n  WideAssociation:\n    is_a: Association\n    subject: Thing\n    predicate: related_to\n    object: Sub\n    required_edge_properties:\n      - note\n  BadLink:\n    subject: Thing\n    predicate: note\n    object: Thing\n"
        );
        assert_eq!(
            codes(&src),
            vec![
                "ASSOCIATION_PREDICATE_NOT_PREDICATE",
                "EDGE_PROPERTY_KIND_MISMATCH",
                "ASSOCIATION_WIDENS_PARENT",
                "ASSOCIATION_WIDENS_PARENT",
                "NAMING_CONVENTION",
            ]
        );
    }

    #[test]
    fn mixin_slot_shadowing_is_warning() {
        let src = format!(
            "{HEAD}classes:\n  A:\n    mixins:\n      - M1\n      - M2\n  M1:\n    is_mixin: true\n    slots:\n      - s\n  M2:\n    is_mixin: true\n    slots:\n      - s\nslots:\n  s:\n    slot_kind: node_property\n"
        );
        let v = validate_schema(&parse_schema(&src).unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, SchemaViolationCode::MixinSlotShadowed);
        assert!(v[0].detail.contains("`M1` wins"));
    }

    #[test]
    fn malformed_mapping_target() {
        let src =
            format!("{HEAD}classes:\n  A:\n    mappings:\n      - relation: broad\n        target: not a curie\n");
        assert_eq!(codes(&src), vec!["MALFORMED_MAPPING_TARGET"]);
    }
}
