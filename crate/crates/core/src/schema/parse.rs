use std::collections::HashSet;
use std::str::FromStr;

use indexmap::IndexMap;

use super::model::*;
use super::yaml::{self, Pos, Yaml};
use super::{ParseWarning, SchemaError};

/// Maximum length of any identifier, in bytes.
pub const MAX_IDENTIFIER_LEN: usize = 256;

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Downgrade unknown keys from errors to warnings.
    pub lax: bool,
    /// Maximum nesting depth of collections.
    pub max_depth: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            lax: false,
            max_depth: 8,
        }
    }
}

/// Parses a schema document in strict mode.
pub fn parse_schema(source: &str) -> Result<SchemaDocument, SchemaError> {
    parse_schema_with(source, &ParseOptions::default()).map(|(doc, _)| doc)
}

/// Parses a schema document, returning warnings collected in lax mode.
pub fn parse_schema_with(
    source: &str,
    options: &ParseOptions,
) -> Result<(SchemaDocument, Vec<ParseWarning>), SchemaError> {
    let root = yaml::parse(source, options.max_depth, MAX_IDENTIFIER_LEN)?;
    let mut builder = Builder {
        lax: options.lax,
        warnings: Vec::new(),
    };
    let doc = builder.document(root)?;
    Ok((doc, builder.warnings))
}

struct Builder {
    lax: bool,
    warnings: Vec<ParseWarning>,
}

fn syntax_at(pos: Pos, token: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::Syntax {
        line: pos.line,
        column: pos.column,
        token: token.into(),
        message: message.into(),
    }
}

/// Entries of one mapping, consumed key by key; leftovers are unknown keys.
struct Fields {
    entries: IndexMap<String, (Pos, Yaml)>,
    pos: Pos,
    context: String,
}

impl Builder {
    fn fields(&self, node: Yaml, context: &str) -> Result<Fields, SchemaError> {
        match node {
            Yaml::Map(entries, pos) => {
                let mut map = IndexMap::new();
                for (key, key_pos, value) in entries {
                    if map.contains_key(&key) {
                        return Err(SchemaError::DuplicateName {
                            kind: "key".into(),
                            name: format!("{context}.{key}"),
                            line: key_pos.line,
                        });
                    }
                    map.insert(key, (key_pos, value));
                }
                Ok(Fields {
                    entries: map,
                    pos,
                    context: context.to_string(),
                })
            }
            Yaml::Null(pos) => Ok(Fields {
                entries: IndexMap::new(),
                pos,
                context: context.to_string(),
            }),
            other => Err(syntax_at(
                other.pos(),
                other.kind(),
                format!("`{context}` must be a mapping"),
            )),
        }
    }

    fn finish(&mut self, fields: Fields) -> Result<(), SchemaError> {
        for (key, (pos, _)) in fields.entries {
            if self.lax {
                self.warnings.push(ParseWarning {
                    line: pos.line,
                    message: format!("unknown key `{key}` in `{}` ignored", fields.context),
                });
            } else {
                return Err(syntax_at(
                    pos,
                    key.clone(),
                    format!("unknown key `{key}` in `{}`", fields.context),
                ));
            }
        }
        Ok(())
    }

    fn document(&mut self, root: Yaml) -> Result<SchemaDocument, SchemaError> {
        let mut f = self.fields(root, "document")?;
        let name = f.required_string("name")?;
        let version = f.required_string("version")?;

        let mut prefixes = IndexMap::new();
        if let Some((_, node)) = f.entries.shift_remove("prefixes") {
            for (prefix, pos, value) in self.named_entries(node, "prefix")? {
                if prefix.contains(':') {
                    return Err(syntax_at(pos, prefix, "prefix may not contain `:`"));
                }
                let base = scalar_value(value, "prefixes")?;
                prefixes.insert(prefix, base);
            }
        }

        let mut classes = IndexMap::new();
        if let Some((_, node)) = f.entries.shift_remove("classes") {
            for (name, _, body) in self.named_entries(node, "class")? {
                let def = self.class(name.clone(), body)?;
                classes.insert(name, def);
            }
        }
        let mut slots = IndexMap::new();
        if let Some((_, node)) = f.entries.shift_remove("slots") {
            for (name, _, body) in self.named_entries(node, "slot")? {
                let def = self.slot(name.clone(), body)?;
                slots.insert(name, def);
            }
        }
        let mut associations = IndexMap::new();
        if let Some((_, node)) = f.entries.shift_remove("associations") {
            for (name, _, body) in self.named_entries(node, "association")? {
                let def = self.association(name.clone(), body)?;
                associations.insert(name, def);
            }
        }
        let mut types = IndexMap::new();
        if let Some((_, node)) = f.entries.shift_remove("types") {
            for (name, _, body) in self.named_entries(node, "type")? {
                let def = self.type_def(name.clone(), body)?;
                types.insert(name, def);
            }
        }
        self.finish(f)?;
        Ok(SchemaDocument {
            name,
            version,
            prefixes,
            classes,
            slots,
            associations,
            types,
        })
    }

    /// Entries of a `name -> definition` section, rejecting duplicate names.
    fn named_entries(&self, node: Yaml, kind: &str) -> Result<Vec<(String, Pos, Yaml)>, SchemaError> {
        let entries = match node {
            Yaml::Map(entries, _) => entries,
            Yaml::Null(_) => Vec::new(),
            other => {
                return Err(syntax_at(
                    other.pos(),
                    other.kind(),
                    format!("{kind} section must be a mapping"),
                ))
            }
        };
        let mut seen = HashSet::new();
        for (name, pos, _) in &entries {
            if !seen.insert(name.as_str()) {
                return Err(SchemaError::DuplicateName {
                    kind: kind.to_string(),
                    name: name.clone(),
                    line: pos.line,
                });
            }
        }
        Ok(entries)
    }

    fn class(&mut self, name: String, body: Yaml) -> Result<ClassDefinition, SchemaError> {
        let mut f = self.fields(body, &name)?;
        let def = ClassDefinition {
            description: f.string("description")?.unwrap_or_default(),
            is_a: f.name("is_a")?,
            mixins: f.name_list("mixins")?,
            is_mixin: f.bool("is_mixin")?.unwrap_or(false),
            slots: f.name_list("slots")?,
            id_prefixes: f.name_list("id_prefixes")?,
            mappings: self.mappings(&mut f)?,
            name,
        };
        self.finish(f)?;
        Ok(def)
    }

    fn slot(&mut self, name: String, body: Yaml) -> Result<SlotDefinition, SchemaError> {
        let mut f = self.fields(body, &name)?;
        let def = SlotDefinition {
            description: f.string("description")?.unwrap_or_default(),
            is_a: f.name("is_a")?,
            slot_kind: f.required_keyword("slot_kind")?,
            domain: f.name("domain")?,
            range: f.name("range")?,
            multivalued: f.bool("multivalued")?.unwrap_or(false),
            required: f.bool("required")?.unwrap_or(false),
            symmetric: f.bool("symmetric")?.unwrap_or(false),
            mappings: self.mappings(&mut f)?,
            name,
        };
        self.finish(f)?;
        Ok(def)
    }

    fn association(&mut self, name: String, body: Yaml) -> Result<AssociationDefinition, SchemaError> {
        let mut f = self.fields(body, &name)?;
        let def = AssociationDefinition {
            description: f.string("description")?.unwrap_or_default(),
            is_a: f.name("is_a")?,
            subject: f.required_name("subject")?,
            predicate: f.required_name("predicate")?,
            object: f.required_name("object")?,
            required_edge_properties: f.name_list("required_edge_properties")?,
            optional_edge_properties: f.name_list("optional_edge_properties")?,
            name,
        };
        self.finish(f)?;
        Ok(def)
    }

    fn type_def(&mut self, name: String, body: Yaml) -> Result<TypeDefinition, SchemaError> {
        let mut f = self.fields(body, &name)?;
        let def = TypeDefinition {
            base: f.required_keyword("base")?,
            description: f.string("description")?.unwrap_or_default(),
            name,
        };
        self.finish(f)?;
        Ok(def)
    }

    fn mappings(&mut self, f: &mut Fields) -> Result<Vec<Mapping>, SchemaError> {
        let Some((pos, node)) = f.entries.shift_remove("mappings") else {
            return Ok(Vec::new());
        };
        let items = match node {
            Yaml::Seq(items, _) => items,
            Yaml::Null(_) => Vec::new(),
            other => return Err(syntax_at(pos, other.kind(), "`mappings` must be a sequence")),
        };
        let context = format!("{}.mappings", f.context);
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            let mut m = self.fields(item, &context)?;
            let relation = m.required_keyword("relation")?;
            let target = m.required_string("target")?;
            self.finish(m)?;
            out.push(Mapping { relation, target });
        }
        Ok(out)
    }
}

fn scalar_value(node: Yaml, key: &str) -> Result<String, SchemaError> {
    match node {
        Yaml::Scalar(s, _) => Ok(s),
        other => Err(syntax_at(
            other.pos(),
            other.kind(),
            format!("`{key}` must be a scalar"),
        )),
    }
}

fn check_identifier(value: &str, pos: Pos) -> Result<(), SchemaError> {
    if value.len() > MAX_IDENTIFIER_LEN {
        return Err(syntax_at(
            pos,
            value.chars().take(32).collect::<String>(),
            format!("identifier longer than {MAX_IDENTIFIER_LEN} bytes"),
        ));
    }
    Ok(())
}

impl Fields {
    fn string(&mut self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.entries.shift_remove(key) {
            None | Some((_, Yaml::Null(_))) => Ok(None),
            Some((_, node)) => scalar_value(node, key).map(Some),
        }
    }

    fn required_string(&mut self, key: &str) -> Result<String, SchemaError> {
        let pos = self.pos;
        self.string(key)?
            .ok_or_else(|| syntax_at(pos, key, format!("missing required key `{key}` in `{}`", self.context)))
    }

    fn name(&mut self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.entries.shift_remove(key) {
            None | Some((_, Yaml::Null(_))) => Ok(None),
            Some((_, Yaml::Scalar(s, pos))) => {
                check_identifier(&s, pos)?;
                Ok(Some(s))
            }
            Some((_, other)) => Err(syntax_at(
                other.pos(),
                other.kind(),
                format!("`{key}` must be a scalar"),
            )),
        }
    }

    fn required_name(&mut self, key: &str) -> Result<String, SchemaError> {
        let pos = self.pos;
        self.name(key)?
            .ok_or_else(|| syntax_at(pos, key, format!("missing required key `{key}` in `{}`", self.context)))
    }

    fn name_list(&mut self, key: &str) -> Result<Vec<String>, SchemaError> {
        match self.entries.shift_remove(key) {
            None | Some((_, Yaml::Null(_))) => Ok(Vec::new()),
            Some((_, Yaml::Seq(items, _))) => items
                .into_iter()
                .map(|item| match item {
                    Yaml::Scalar(s, pos) => {
                        check_identifier(&s, pos)?;
                        Ok(s)
                    }
                    other => Err(syntax_at(
                        other.pos(),
                        other.kind(),
                        format!("`{key}` items must be scalars"),
                    )),
                })
                .collect(),
            Some((_, other)) => Err(syntax_at(
                other.pos(),
                other.kind(),
                format!("`{key}` must be a sequence"),
            )),
        }
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>, SchemaError> {
        match self.entries.shift_remove(key) {
            None | Some((_, Yaml::Null(_))) => Ok(None),
            Some((_, Yaml::Scalar(s, pos))) => match s.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(syntax_at(pos, s.clone(), format!("`{key}` must be `true` or `false`"))),
            },
            Some((_, other)) => Err(syntax_at(
                other.pos(),
                other.kind(),
                format!("`{key}` must be a boolean"),
            )),
        }
    }

    fn required_keyword<T: FromStr<Err = String>>(&mut self, key: &str) -> Result<T, SchemaError> {
        let pos = self.pos;
        match self.entries.shift_remove(key) {
            Some((_, Yaml::Scalar(s, pos))) => s.parse().map_err(|msg: String| syntax_at(pos, s.clone(), msg)),
            Some((_, other)) => Err(syntax_at(
                other.pos(),
                other.kind(),
                format!("`{key}` must be a scalar"),
            )),
            None => Err(syntax_at(
                pos,
                key,
                format!("missing required key `{key}` in `{}`", self.context),
            )),
        }
    }
}
