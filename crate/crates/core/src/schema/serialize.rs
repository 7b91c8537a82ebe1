use std::fmt::Write;

use super::model::*;
use super::yaml::quote_if_needed;

/// Writes `doc` in the schema file format. Default-valued fields are omitted,
/// so `parse_schema(&serialize_schema(d)) == d`.
pub fn serialize_schema(doc: &SchemaDocument) -> String {
    let mut out = String::new();
    let w = &mut out;
    scalar_line(w, 0, "name", &doc.name);
    scalar_line(w, 0, "version", &doc.version);
    if !doc.prefixes.is_empty() {
        w.push_str("prefixes:\n");
        for (prefix, base) in &doc.prefixes {
            scalar_line(w, 2, prefix, base);
        }
    }
    if !doc.classes.is_empty() {
        w.push_str("classes:\n");
        for class in doc.classes.values() {
            key_line(w, 2, &class.name);
            optional_text(w, "description", &class.description);
            optional_line(w, "is_a", class.is_a.as_deref());
            list(w, "mixins", &class.mixins);
            flag(w, "is_mixin", class.is_mixin);
            list(w, "slots", &class.slots);
            list(w, "id_prefixes", &class.id_prefixes);
            mappings(w, &class.mappings);
        }
    }
    if !doc.slots.is_empty() {
        w.push_str("slots:\n");
        for slot in doc.slots.values() {
            key_line(w, 2, &slot.name);
            optional_text(w, "description", &slot.description);
            optional_line(w, "is_a", slot.is_a.as_deref());
            scalar_line(w, 4, "slot_kind", slot.slot_kind.as_str());
            optional_line(w, "domain", slot.domain.as_deref());
            optional_line(w, "range", slot.range.as_deref());
            flag(w, "multivalued", slot.multivalued);
            flag(w, "required", slot.required);
            flag(w, "symmetric", slot.symmetric);
            mappings(w, &slot.mappings);
        }
    }
    if !doc.associations.is_empty() {
        w.push_str("associations:\n");
        for assoc in doc.associations.values() {
            key_line(w, 2, &assoc.name);
            optional_text(w, "description", &assoc.description);
            optional_line(w, "is_a", assoc.is_a.as_deref());
            scalar_line(w, 4, "subject", &assoc.subject);
            scalar_line(w, 4, "predicate", &assoc.predicate);
            scalar_line(w, 4, "object", &assoc.object);
            list(w, "required_edge_properties", &assoc.required_edge_properties);
            list(w, "optional_edge_properties", &assoc.optional_edge_properties);
        }
    }
    if !doc.types.is_empty() {
        w.push_str("types:\n");
        for ty in doc.types.values() {
            key_line(w, 2, &ty.name);
            scalar_line(w, 4, "base", ty.base.as_str());
            optional_text(w, "description", &ty.description);
        }
    }
    out
}

fn key_line(w: &mut String, indent: usize, key: &str) {
    let _ = writeln!(w, "{:indent$}{}:", "", quote_if_needed(key));
}

fn scalar_line(w: &mut String, indent: usize, key: &str, value: &str) {
    let _ = writeln!(w, "{:indent$}{}: {}", "", quote_if_needed(key), quote_if_needed(value));
}

fn optional_text(w: &mut String, key: &str, value: &str) {
    if !value.is_empty() {
        scalar_line(w, 4, key, value);
    }
}

fn optional_line(w: &mut String, key: &str, value: Option<&str>) {
    if let Some(v) = value {
        scalar_line(w, 4, key, v);
    }
}

fn flag(w: &mut String, key: &str, value: bool) {
    if value {
        scalar_line(w, 4, key, "true");
    }
}

fn list(w: &mut String, key: &str, items: &[String]) {
    if items.is_empty() {
        return;
    }
    key_line(w, 4, key);
    for item in items {
        let _ = writeln!(w, "      - {}", quote_if_needed(item));
    }
}

fn mappings(w: &mut String, items: &[Mapping]) {
    if items.is_empty() {
        return;
    }
    key_line(w, 4, "mappings");
    for m in items {
        let _ = writeln!(w, "      - relation: {}", m.relation.as_str());
        let _ = writeln!(w, "        target: {}", quote_if_needed(&m.target));
    }
}
