use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Name of the root of the predicate hierarchy.
pub const ROOT_PREDICATE: &str = "related_to";

/// A parsed schema: classes, slots, associations, types and prefix map.
///
/// Maps keep declaration order; equality ignores it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaDocument {
    pub name: String,
    pub version: String,
    /// Prefix to IRI base, in declaration order.
    pub prefixes: IndexMap<String, String>,
    pub classes: IndexMap<String, ClassDefinition>,
    pub slots: IndexMap<String, SlotDefinition>,
    pub associations: IndexMap<String, AssociationDefinition>,
    pub types: IndexMap<String, TypeDefinition>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassDefinition {
    pub name: String,
    pub description: String,
    pub is_a: Option<String>,
    pub mixins: Vec<String>,
    pub is_mixin: bool,
    pub slots: Vec<String>,
    /// Allowed identifier prefixes, most preferred first.
    pub id_prefixes: Vec<String>,
    pub mappings: Vec<Mapping>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotDefinition {
    pub name: String,
    pub description: String,
    pub is_a: Option<String>,
    pub slot_kind: SlotKind,
    pub domain: Option<String>,
    pub range: Option<String>,
    pub multivalued: bool,
    pub required: bool,
    pub symmetric: bool,
    pub mappings: Vec<Mapping>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDefinition {
    pub name: String,
    pub description: String,
    pub is_a: Option<String>,
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub required_edge_properties: Vec<String>,
    pub optional_edge_properties: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDefinition {
    pub name: String,
    pub base: BaseType,
    pub description: String,
}

/// A cross-vocabulary mapping from a schema element to an external term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    pub relation: MappingRelation,
    /// CURIE of the external term.
    pub target: String,
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(
                        "expected one of [{}], found `{other}`",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum! {
    /// What a slot describes.
    SlotKind {
        Predicate => "predicate",
        NodeProperty => "node_property",
        EdgeProperty => "edge_property",
    }
}

keyword_enum! {
    MappingRelation {
        Exact => "exact",
        Close => "close",
        Broad => "broad",
        Narrow => "narrow",
        Related => "related",
    }
}

keyword_enum! {
    BaseType {
        String => "string",
        Integer => "integer",
        Float => "float",
        Boolean => "boolean",
        Curie => "curie",
        Iri => "iri",
    }
}

impl MappingRelation {
    /// The SKOS property this relation corresponds to.
    pub fn skos_property(self) -> &'static str {
        match self {
            MappingRelation::Exact => "skos:exactMatch",
            MappingRelation::Close => "skos:closeMatch",
            MappingRelation::Broad => "skos:broadMatch",
            MappingRelation::Narrow => "skos:narrowMatch",
            MappingRelation::Related => "skos:relatedMatch",
        }
    }
}

impl SchemaDocument {
    pub fn class(&self, name: &str) -> Option<&ClassDefinition> {
        self.classes.get(name)
    }

    pub fn slot(&self, name: &str) -> Option<&SlotDefinition> {
        self.slots.get(name)
    }

    /// Returns the slot if it exists and is a predicate.
    pub fn predicate(&self, name: &str) -> Option<&SlotDefinition> {
        self.slots.get(name).filter(|s| s.slot_kind == SlotKind::Predicate)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &SlotDefinition> {
        self.slots.values().filter(|s| s.slot_kind == SlotKind::Predicate)
    }

    pub fn is_mixin(&self, class: &str) -> bool {
        self.classes.get(class).is_some_and(|c| c.is_mixin)
    }
}
