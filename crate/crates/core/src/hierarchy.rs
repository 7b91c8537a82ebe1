//! Transitive-closure indexes over the class, mixin and predicate
//! hierarchies, and the expansions built on them.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::schema::{validate_schema, SchemaDocument, SchemaViolation, SlotKind, ROOT_PREDICATE};
use crate::Severity;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("schema has {} structural error(s); first: {}", .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    SchemaNotValid(Vec<SchemaViolation>),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("empty category set")]
    EmptySet,
}

/// Materialized reachability over a validated schema.
///
/// Ancestor lists are reflexive and ordered nearest-first. Mixins are kept
/// out of `class_ancestors`; a class's mixins (including those inherited
/// along `is_a` and through mixin `is_a`) live in `mixin_membership`.
#[derive(Debug, Clone)]
pub struct ClosureIndex {
    class_ancestors: HashMap<String, Vec<String>>,
    class_descendants: HashMap<String, BTreeSet<String>>,
    predicate_ancestors: HashMap<String, Vec<String>>,
    predicate_descendants: HashMap<String, BTreeSet<String>>,
    mixin_membership: HashMap<String, BTreeSet<String>>,
    mixin_carriers: HashMap<String, BTreeSet<String>>,
    mixins: BTreeSet<String>,
    class_bits: HashMap<String, usize>,
    /// Per class bit: ancestors plus mixin membership.
    up_sets: Vec<FixedBitSet>,
}

/// Builds the closure index. The schema must have no structural errors.
pub fn build_closure(doc: &SchemaDocument) -> Result<ClosureIndex, HierarchyError> {
    let errors: Vec<SchemaViolation> = validate_schema(doc)
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(HierarchyError::SchemaNotValid(errors));
    }

    let class_ancestors: HashMap<String, Vec<String>> = doc
        .classes
        .keys()
        .map(|name| {
            let mut chain = vec![name.clone()];
            let mut current = doc.classes[name].is_a.as_ref();
            while let Some(parent) = current {
                chain.push(parent.clone());
                current = doc.classes[parent].is_a.as_ref();
            }
            (name.clone(), chain)
        })
        .collect();
    let class_descendants = invert(&class_ancestors);

    let predicate_ancestors: HashMap<String, Vec<String>> = doc
        .predicates()
        .map(|slot| {
            let mut chain = vec![slot.name.clone()];
            let mut current = slot.is_a.as_ref();
            while let Some(parent) = current {
                chain.push(parent.clone());
                current = doc.slots[parent].is_a.as_ref();
            }
            (slot.name.clone(), chain)
        })
        .collect();
    let predicate_descendants = invert(&predicate_ancestors);

    let mut mixin_membership = HashMap::new();
    for name in doc.classes.keys() {
        mixin_closure(doc, &class_ancestors, name, &mut mixin_membership);
    }
    let mixins: BTreeSet<String> = doc
        .classes
        .values()
        .filter(|c| c.is_mixin)
        .map(|c| c.name.clone())
        .collect();
    let mut mixin_carriers: HashMap<String, BTreeSet<String>> =
        mixins.iter().map(|m| (m.clone(), BTreeSet::new())).collect();
    for (class, members) in &mixin_membership {
        if doc.classes[class].is_mixin {
            continue;
        }
        for m in members {
            mixin_carriers.get_mut(m).unwrap().insert(class.clone());
        }
    }

    let class_bits: HashMap<String, usize> = doc.classes.keys().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let up_sets = doc
        .classes
        .keys()
        .map(|name| {
            let mut set = FixedBitSet::with_capacity(class_bits.len());
            for a in &class_ancestors[name] {
                set.insert(class_bits[a]);
            }
            for m in &mixin_membership[name] {
                set.insert(class_bits[m]);
            }
            set
        })
        .collect();

    Ok(ClosureIndex {
        class_ancestors,
        class_descendants,
        predicate_ancestors,
        predicate_descendants,
        mixin_membership,
        mixin_carriers,
        mixins,
        class_bits,
        up_sets,
    })
}

fn invert(ancestors: &HashMap<String, Vec<String>>) -> HashMap<String, BTreeSet<String>> {
    let mut out: HashMap<String, BTreeSet<String>> = ancestors.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    for (node, ups) in ancestors {
        for a in ups {
            out.get_mut(a).expect("ancestor is a known name").insert(node.clone());
        }
    }
    out
}

/// Mixins reachable from `class` via the mixin lists of the class and its
/// ancestors, closed under mixin `is_a` and the mixins' own mixin lists.
fn mixin_closure(
    doc: &SchemaDocument,
    ancestors: &HashMap<String, Vec<String>>,
    class: &str,
    memo: &mut HashMap<String, BTreeSet<String>>,
) -> BTreeSet<String> {
    if let Some(done) = memo.get(class) {
        return done.clone();
    }
    let mut out = BTreeSet::new();
    for a in &ancestors[class] {
        for m in &doc.classes[a].mixins {
            out.extend(ancestors[m].iter().cloned());
            out.extend(mixin_closure(doc, ancestors, m, memo));
        }
    }
    memo.insert(class.to_string(), out.clone());
    out
}

impl ClosureIndex {
    pub fn contains_class(&self, class: &str) -> bool {
        self.class_ancestors.contains_key(class)
    }

    pub fn contains_predicate(&self, predicate: &str) -> bool {
        self.predicate_ancestors.contains_key(predicate)
    }

    pub fn is_mixin(&self, class: &str) -> bool {
        self.mixins.contains(class)
    }

    /// Reflexive ancestors, nearest first.
    pub fn class_ancestors(&self, class: &str) -> Option<&[String]> {
        self.class_ancestors.get(class).map(Vec::as_slice)
    }

    pub fn class_descendants(&self, class: &str) -> Option<&BTreeSet<String>> {
        self.class_descendants.get(class)
    }

    pub fn predicate_ancestors(&self, predicate: &str) -> Option<&[String]> {
        self.predicate_ancestors.get(predicate).map(Vec::as_slice)
    }

    pub fn predicate_descendants(&self, predicate: &str) -> Option<&BTreeSet<String>> {
        self.predicate_descendants.get(predicate)
    }

    pub fn mixin_membership(&self, class: &str) -> Option<&BTreeSet<String>> {
        self.mixin_membership.get(class)
    }

    /// Non-mixin classes whose mixin membership includes `mixin`.
    pub fn mixin_carriers(&self, mixin: &str) -> Option<&BTreeSet<String>> {
        self.mixin_carriers.get(mixin)
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.class_ancestors.keys().map(String::as_str)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.predicate_ancestors.keys().map(String::as_str)
    }

    /// Distance from the root of the class's own hierarchy.
    pub fn class_depth(&self, class: &str) -> Option<usize> {
        self.class_ancestors.get(class).map(|a| a.len() - 1)
    }

    pub fn predicate_depth(&self, predicate: &str) -> Option<usize> {
        self.predicate_ancestors.get(predicate).map(|a| a.len() - 1)
    }

    pub fn is_predicate_descendant(&self, predicate: &str, ancestor: &str) -> bool {
        self.predicate_ancestors
            .get(predicate)
            .is_some_and(|ups| ups.iter().any(|a| a == ancestor))
    }

    /// Bit assigned to `class` in [`ClassSet`]s.
    pub fn class_bit(&self, class: &str) -> Option<usize> {
        self.class_bits.get(class).copied()
    }

    /// Everything a node with these categories is an instance of: their
    /// ancestors and mixin memberships. Unknown names are ignored.
    pub fn category_closure<'a>(&self, categories: impl IntoIterator<Item = &'a str>) -> ClassSet {
        let mut set = FixedBitSet::with_capacity(self.class_bits.len());
        for c in categories {
            if let Some(&bit) = self.class_bits.get(c) {
                set.union_with(&self.up_sets[bit]);
            }
        }
        ClassSet(set)
    }

    /// A set holding exactly the given classes. Unknown names are ignored.
    pub fn class_set<'a>(&self, classes: impl IntoIterator<Item = &'a str>) -> ClassSet {
        let mut set = FixedBitSet::with_capacity(self.class_bits.len());
        for c in classes {
            if let Some(&bit) = self.class_bits.get(c) {
                set.insert(bit);
            }
        }
        ClassSet(set)
    }
}

/// A set of classes as a bitset over [`ClosureIndex::class_bit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSet(FixedBitSet);

impl ClassSet {
    pub fn contains_bit(&self, bit: usize) -> bool {
        self.0.contains(bit)
    }

    pub fn contains(&self, index: &ClosureIndex, class: &str) -> bool {
        index.class_bit(class).is_some_and(|b| self.0.contains(b))
    }

    pub fn intersects(&self, other: &ClassSet) -> bool {
        !self.0.is_disjoint(&other.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }
}

/// Whether `a` is `b` or a descendant of `b`; with `use_mixins`, also
/// whether `a` carries mixin `b`.
pub fn is_subclass_of(index: &ClosureIndex, a: &str, b: &str, use_mixins: bool) -> Result<bool, HierarchyError> {
    let ancestors = index
        .class_ancestors(a)
        .ok_or_else(|| HierarchyError::UnknownClass(a.to_string()))?;
    if !index.contains_class(b) {
        return Err(HierarchyError::UnknownClass(b.to_string()));
    }
    Ok(ancestors.iter().any(|x| x == b) || (use_mixins && index.mixin_membership[a].contains(b)))
}

/// Union of the descendants of every given predicate.
pub fn expand_predicates<I, S>(index: &ClosureIndex, predicates: I) -> Result<BTreeSet<String>, HierarchyError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = BTreeSet::new();
    for p in predicates {
        let p = p.as_ref();
        let descendants = index
            .predicate_descendants(p)
            .ok_or_else(|| HierarchyError::UnknownPredicate(p.to_string()))?;
        out.extend(descendants.iter().cloned());
    }
    Ok(out)
}

/// Expands categories down the hierarchy. A class expands to its
/// descendants; a mixin expands to the instantiable classes carrying it.
pub fn expand_categories<I, S>(index: &ClosureIndex, categories: I) -> Result<BTreeSet<String>, HierarchyError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = BTreeSet::new();
    for c in categories {
        let c = c.as_ref();
        if index.is_mixin(c) {
            out.extend(index.mixin_carriers[c].iter().cloned());
        } else {
            let descendants = index
                .class_descendants(c)
                .ok_or_else(|| HierarchyError::UnknownClass(c.to_string()))?;
            out.extend(descendants.iter().cloned());
        }
    }
    Ok(out)
}

/// Result of [`most_specific_category`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryChoice {
    pub category: String,
    /// Set when several incomparable categories were most specific; holds
    /// all of them in sorted order.
    pub incomparable: Option<Vec<String>>,
}

/// The member of `categories` that no other member specializes.
///
/// A category is dominated when another member is its proper descendant or
/// carries it as a mixin. Incomparable minima are resolved by bytewise name
/// order and reported in [`CategoryChoice::incomparable`].
pub fn most_specific_category<I, S>(index: &ClosureIndex, categories: I) -> Result<CategoryChoice, HierarchyError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let set: BTreeSet<String> = categories.into_iter().map(|c| c.as_ref().to_string()).collect();
    if set.is_empty() {
        return Err(HierarchyError::EmptySet);
    }
    if let Some(unknown) = set.iter().find(|c| !index.contains_class(c)) {
        return Err(HierarchyError::UnknownClass(unknown.clone()));
    }
    let minimal: Vec<String> = set
        .iter()
        .filter(|c| {
            !set.iter()
                .any(|other| other != *c && is_subclass_of(index, other, c, true).unwrap_or(false))
        })
        .cloned()
        .collect();
    let category = minimal[0].clone();
    Ok(CategoryChoice {
        category,
        incomparable: (minimal.len() > 1).then_some(minimal),
    })
}

/// The `id_prefixes` of `class`, or of its nearest ancestor that has any.
pub fn inherited_id_prefixes<'a>(doc: &'a SchemaDocument, index: &ClosureIndex, class: &str) -> Option<&'a [String]> {
    index
        .class_ancestors(class)?
        .iter()
        .filter_map(|a| doc.classes.get(a))
        .map(|c| c.id_prefixes.as_slice())
        .find(|p| !p.is_empty())
}

/// The domain declared on `predicate` or its nearest ancestor.
pub fn inherited_domain<'a>(doc: &'a SchemaDocument, index: &ClosureIndex, predicate: &str) -> Option<&'a str> {
    index
        .predicate_ancestors(predicate)?
        .iter()
        .find_map(|p| doc.slots.get(p).and_then(|s| s.domain.as_deref()))
}

/// The range declared on `predicate` or its nearest ancestor.
pub fn inherited_range<'a>(doc: &'a SchemaDocument, index: &ClosureIndex, predicate: &str) -> Option<&'a str> {
    index
        .predicate_ancestors(predicate)?
        .iter()
        .find_map(|p| doc.slots.get(p).and_then(|s| s.range.as_deref()))
}

/// Whether `predicate` is declared symmetric.
pub fn is_symmetric(doc: &SchemaDocument, predicate: &str) -> bool {
    doc.slots
        .get(predicate)
        .is_some_and(|s| s.slot_kind == SlotKind::Predicate && s.symmetric)
}

/// All predicates of the schema, sorted.
pub fn all_predicates(index: &ClosureIndex) -> BTreeSet<String> {
    index
        .predicate_descendants(ROOT_PREDICATE)
        .cloned()
        .unwrap_or_else(|| index.predicates().map(str::to_string).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_schema;
    use crate::seed;

    fn seed_index() -> (SchemaDocument, ClosureIndex) {
        let doc = parse_schema(seed::SEED_SCHEMA).unwrap();
        let index = build_closure(&doc).unwrap();
        (doc, index)
    }

    #[test]
    fn related_to_covers_regulation() {
        let (_, index) = seed_index();
        let all = index.predicate_descendants("related_to").unwrap();
        assert!(all.contains("positively_regulates") && all.contains("negatively_regulates"));
        assert_eq!(all.len(), index.predicates().count());
    }

    #[test]
    fn single_class_reflexive() {
        let doc = parse_schema("name: t\nversion: v\nclasses:\n  Solo:\n    description: x\n").unwrap();
        let index = build_closure(&doc).unwrap();
        assert_eq!(index.class_ancestors("Solo").unwrap(), ["Solo".to_string()]);
        assert_eq!(index.class_descendants("Solo").unwrap().len(), 1);
    }

    #[test]
    fn invalid_schema_rejected() {
        let doc = parse_schema("name: t\nversion: v\nclasses:\n  A:\n    is_a: B\n  B:\n    is_a: A\n").unwrap();
        assert!(matches!(build_closure(&doc), Err(HierarchyError::SchemaNotValid(_))));
    }

    #[test]
    fn subclass_queries() {
        let (_, index) = seed_index();
        assert!(is_subclass_of(&index, "Disease", "NamedThing", false).unwrap());
        assert!(is_subclass_of(&index, "Gene", "Gene", false).unwrap());
        assert!(is_subclass_of(&index, "Gene", "GeneOrGeneProduct", true).unwrap());
        assert!(!is_subclass_of(&index, "Gene", "GeneOrGeneProduct", false).unwrap());
        assert!(!is_subclass_of(&index, "NamedThing", "Disease", false).unwrap());
        assert_eq!(
            is_subclass_of(&index, "Gene", "Nope", false),
            Err(HierarchyError::UnknownClass("Nope".into()))
        );
    }

    #[test]
    fn parent_is_second_ancestor() {
        let (doc, index) = seed_index();
        for class in doc.classes.values() {
            let ancestors = index.class_ancestors(&class.name).unwrap();
            assert_eq!(ancestors[0], class.name);
            assert_eq!(ancestors.get(1), class.is_a.as_ref());
        }
    }

    #[test]
    fn predicate_expansion_examples() {
        let (_, index) = seed_index();
        assert_eq!(
            expand_predicates(&index, ["has_phenotype"]).unwrap(),
            BTreeSet::from(["has_phenotype".to_string()])
        );
        assert_eq!(
            expand_predicates(&index, ["entity_regulates_entity"]).unwrap(),
            [
                "entity_regulates_entity",
                "negatively_regulates",
                "positively_regulates"
            ]
            .iter()
            .map(|s| s.to_string())
            .collect()
        );
        assert_eq!(
            expand_predicates(&index, ["xyzzy"]),
            Err(HierarchyError::UnknownPredicate("xyzzy".into()))
        );
    }

    #[test]
    fn mixin_expansion_lists_carriers() {
        let (_, index) = seed_index();
        assert_eq!(
            expand_categories(&index, ["GeneOrGeneProduct"]).unwrap(),
            BTreeSet::from(["Gene".to_string(), "Protein".to_string()])
        );
    }

    #[test]
    fn most_specific_examples() {
        let (_, index) = seed_index();
        let pick = most_specific_category(&index, ["NamedThing", "BiologicalEntity", "Gene"]).unwrap();
        assert_eq!(pick.category, "Gene");
        assert!(pick.incomparable.is_none());
        assert_eq!(most_specific_category(&index, ["Disease"]).unwrap().category, "Disease");
        let tie = most_specific_category(&index, ["Gene", "Disease"]).unwrap();
        assert_eq!(tie.category, "Disease");
        assert_eq!(tie.incomparable, Some(vec!["Disease".to_string(), "Gene".to_string()]));
        let mixed = most_specific_category(&index, ["GeneOrGeneProduct", "Gene"]).unwrap();
        assert_eq!(mixed.category, "Gene");
        assert!(mixed.incomparable.is_none());
        assert_eq!(
            most_specific_category(&index, Vec::<String>::new()),
            Err(HierarchyError::EmptySet)
        );
    }

    #[test]
    fn inherited_constraints() {
        let (doc, index) = seed_index();
        assert_eq!(inherited_domain(&doc, &index, "has_phenotype"), Some("Disease"));
        assert_eq!(
            inherited_range(&doc, &index, "treats"),
            Some("DiseaseOrPhenotypicFeature")
        );
        assert_eq!(inherited_domain(&doc, &index, "affects"), Some("NamedThing"));
        assert_eq!(
            inherited_id_prefixes(&doc, &index, "SmallMolecule").map(|p| p[0].as_str()),
            Some("CHEMBL.COMPOUND")
        );
        assert_eq!(inherited_id_prefixes(&doc, &index, "NamedThing"), None);
    }
}
