//! TSV and JSONL readers and writers for nodes and edges.
//!
//! TSV files start with a header row. Node files need `id` and `category`
//! columns and may have `name`; edge files need `subject`, `predicate` and
//! `object`. Every other column is a multivalued property whose values are
//! joined with `|`. On write the fixed columns come first and the property
//! columns follow in sorted order.
//!
//! JSONL files hold one object per line with the same keys. Multivalued
//! fields are arrays.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use super::{Edge, KgError, Node, Properties};
use crate::identifiers::{parse_curie, Curie};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file name's extension.
    pub fn from_path(path: &str) -> Option<Format> {
        let ext = path.rsplit_once('.')?.1;
        ext.parse().ok()
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Tsv => "tsv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected tsv or jsonl)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

const NODE_COLUMNS: [&str; 3] = ["id", "category", "name"];
const EDGE_COLUMNS: [&str; 3] = ["subject", "predicate", "object"];

fn syntax(line: usize, message: impl Into<String>) -> KgError {
    KgError::Syntax {
        line,
        message: message.into(),
    }
}

fn check_value(line: usize, value: &str) -> Result<(), KgError> {
    if value.is_empty() {
        return Err(syntax(line, "empty value"));
    }
    if value.contains(['|', '\t', '\n', '\r']) {
        return Err(syntax(
            line,
            format!("value `{}` contains a separator", value.escape_debug()),
        ));
    }
    Ok(())
}

fn curie_at(line: usize, text: &str) -> Result<Curie, KgError> {
    parse_curie(text).map_err(|e| syntax(line, e.to_string()))
}

fn split_cell(line: usize, cell: &str) -> Result<Vec<String>, KgError> {
    cell.split('|')
        .map(|part| {
            if part.is_empty() {
                Err(syntax(line, format!("empty entry in cell `{cell}`")))
            } else {
                Ok(part.to_string())
            }
        })
        .collect()
}

fn push_values(props: &mut Properties, key: &str, values: Vec<String>) {
    let slot = props.entry(key.to_string()).or_default();
    for v in values {
        super::push_unique(slot, v);
    }
}

/// Rows of a TSV table as `(line number, cells)`, after the header.
struct Table<'a> {
    header: Vec<&'a str>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn read_table<'a>(source: &'a str, required: &[&'a str]) -> Result<Table<'a>, KgError> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty());
    let Some((hline, header)) = lines.next() else {
        return Ok(Table {
            header: required.to_vec(),
            rows: Vec::new(),
        });
    };
    let header: Vec<&str> = header.split('\t').collect();
    let mut seen = BTreeSet::new();
    for h in &header {
        if h.is_empty() || !seen.insert(*h) {
            return Err(syntax(hline, format!("empty or repeated column `{h}`")));
        }
    }
    for r in required {
        if !seen.contains(r) {
            return Err(syntax(hline, format!("missing column `{r}`")));
        }
    }
    let mut rows = Vec::new();
    for (line, text) in lines {
        let cells: Vec<&str> = text.split('\t').collect();
        if cells.len() > header.len() {
            return Err(syntax(
                line,
                format!("{} cells but {} columns", cells.len(), header.len()),
            ));
        }
        rows.push((line, cells));
    }
    Ok(Table { header, rows })
}

pub fn read_nodes_tsv(source: &str) -> Result<Vec<Node>, KgError> {
    let table = read_table(source, &NODE_COLUMNS[..2])?;
    let mut nodes = Vec::with_capacity(table.rows.len());
    for (line, cells) in table.rows {
        let mut id = None;
        let mut categories = Vec::new();
        let mut name = None;
        let mut properties = Properties::new();
        for (col, cell) in table.header.iter().zip(cells) {
            if cell.is_empty() {
                continue;
            }
            match *col {
                "id" => id = Some(curie_at(line, cell)?),
                "category" => categories = split_cell(line, cell)?,
                "name" => {
                    check_value(line, cell)?;
                    name = Some(cell.to_string());
                }
                other => push_values(&mut properties, other, split_cell(line, cell)?),
            }
        }
        let id = id.ok_or_else(|| syntax(line, "missing id"))?;
        if categories.is_empty() {
            return Err(syntax(line, format!("node {id} has no category")));
        }
        let mut node = Node::new(id, categories);
        node.name = name;
        node.properties = properties;
        nodes.push(node);
    }
    Ok(nodes)
}

pub fn read_edges_tsv(source: &str) -> Result<Vec<Edge>, KgError> {
    let table = read_table(source, &EDGE_COLUMNS)?;
    let mut edges = Vec::with_capacity(table.rows.len());
    for (line, cells) in table.rows {
        let (mut subject, mut predicate, mut object) = (None, None, None);
        let mut properties = Properties::new();
        for (col, cell) in table.header.iter().zip(cells) {
            if cell.is_empty() {
                continue;
            }
            match *col {
                "subject" => subject = Some(curie_at(line, cell)?),
                "object" => object = Some(curie_at(line, cell)?),
                "predicate" => {
                    check_value(line, cell)?;
                    predicate = Some(cell.to_string());
                }
                other => push_values(&mut properties, other, split_cell(line, cell)?),
            }
        }
        let missing = |what: &str| syntax(line, format!("missing {what}"));
        let mut edge = Edge::new(
            subject.ok_or_else(|| missing("subject"))?,
            predicate.ok_or_else(|| missing("predicate"))?,
            object.ok_or_else(|| missing("object"))?,
        );
        edge.properties = properties;
        edges.push(edge);
    }
    Ok(edges)
}

fn property_columns<'a>(props: impl Iterator<Item = &'a Properties>) -> Vec<&'a str> {
    let keys: BTreeSet<&str> = props.flat_map(|p| p.keys().map(String::as_str)).collect();
    keys.into_iter().collect()
}

fn join_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let mut first = true;
    for cell in cells {
        if !first {
            out.push('\t');
        }
        out.push_str(&cell);
        first = false;
    }
    out.push('\n');
}

fn property_cells<'a>(props: &'a Properties, columns: &'a [&str]) -> impl Iterator<Item = String> + 'a {
    columns
        .iter()
        .map(|c| props.get(*c).map(|v| v.join("|")).unwrap_or_default())
}

pub fn write_nodes_tsv<'a>(nodes: impl IntoIterator<Item = &'a Node>) -> String {
    let nodes: Vec<&Node> = nodes.into_iter().collect();
    let columns = property_columns(nodes.iter().map(|n| &n.properties));
    let mut out = String::new();
    join_row(&mut out, NODE_COLUMNS.iter().chain(&columns).map(|c| c.to_string()));
    for n in nodes {
        let fixed = [
            n.id.to_string(),
            n.categories.join("|"),
            n.name.clone().unwrap_or_default(),
        ];
        join_row(
            &mut out,
            fixed.into_iter().chain(property_cells(&n.properties, &columns)),
        );
    }
    out
}

pub fn write_edges_tsv<'a>(edges: impl IntoIterator<Item = &'a Edge>) -> String {
    let edges: Vec<&Edge> = edges.into_iter().collect();
    let columns = property_columns(edges.iter().map(|e| &e.properties));
    let mut out = String::new();
    join_row(&mut out, EDGE_COLUMNS.iter().chain(&columns).map(|c| c.to_string()));
    for e in edges {
        let fixed = [e.subject.to_string(), e.predicate.clone(), e.object.to_string()];
        join_row(
            &mut out,
            fixed.into_iter().chain(property_cells(&e.properties, &columns)),
        );
    }
    out
}

fn json_lines(source: &str) -> impl Iterator<Item = Result<(usize, Map<String, Value>), KgError>> + '_ {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            match serde_json::from_str::<Value>(l) {
                Ok(Value::Object(map)) => Ok((line, map)),
                Ok(_) => Err(syntax(line, "expected a JSON object")),
                Err(e) => Err(syntax(line, e.to_string())),
            }
        })
}

fn json_scalar(line: usize, key: &str, value: &Value) -> Result<String, KgError> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        _ => return Err(syntax(line, format!("`{key}` must be a string"))),
    };
    check_value(line, &text)?;
    Ok(text)
}

fn json_values(line: usize, key: &str, value: &Value) -> Result<Vec<String>, KgError> {
    match value {
        Value::Null => Ok(Vec::new()),
        Value::Array(items) => items.iter().map(|v| json_scalar(line, key, v)).collect(),
        scalar => Ok(vec![json_scalar(line, key, scalar)?]),
    }
}

fn json_required(line: usize, map: &Map<String, Value>, key: &str) -> Result<String, KgError> {
    let value = map.get(key).ok_or_else(|| syntax(line, format!("missing `{key}`")))?;
    json_scalar(line, key, value)
}

pub fn read_nodes_jsonl(source: &str) -> Result<Vec<Node>, KgError> {
    json_lines(source)
        .map(|row| {
            let (line, map) = row?;
            let id = curie_at(line, &json_required(line, &map, "id")?)?;
            let categories = json_values(line, "category", map.get("category").unwrap_or(&Value::Null))?;
            if categories.is_empty() {
                return Err(syntax(line, format!("node {id} has no category")));
            }
            let mut node = Node::new(id, categories);
            if let Some(name) = map.get("name").filter(|v| !v.is_null()) {
                node.name = Some(json_scalar(line, "name", name)?);
            }
            for (key, value) in &map {
                if !NODE_COLUMNS.contains(&key.as_str()) {
                    let values = json_values(line, key, value)?;
                    if !values.is_empty() {
                        push_values(&mut node.properties, key, values);
                    }
                }
            }
            Ok(node)
        })
        .collect()
}

pub fn read_edges_jsonl(source: &str) -> Result<Vec<Edge>, KgError> {
    json_lines(source)
        .map(|row| {
            let (line, map) = row?;
            let mut edge = Edge::new(
                curie_at(line, &json_required(line, &map, "subject")?)?,
                json_required(line, &map, "predicate")?,
                curie_at(line, &json_required(line, &map, "object")?)?,
            );
            for (key, value) in &map {
                if !EDGE_COLUMNS.contains(&key.as_str()) {
                    let values = json_values(line, key, value)?;
                    if !values.is_empty() {
                        push_values(&mut edge.properties, key, values);
                    }
                }
            }
            Ok(edge)
        })
        .collect()
}

fn put_properties(map: &mut Map<String, Value>, props: &Properties) {
    for (k, v) in props {
        map.insert(k.clone(), Value::from(v.clone()));
    }
}

fn push_json_line(out: &mut String, map: Map<String, Value>) {
    out.push_str(&Value::Object(map).to_string());
    out.push('\n');
}

pub fn write_nodes_jsonl<'a>(nodes: impl IntoIterator<Item = &'a Node>) -> String {
    let mut out = String::new();
    for n in nodes {
        let mut map = Map::new();
        map.insert("id".into(), n.id.as_str().into());
        map.insert("category".into(), Value::from(n.categories.clone()));
        if let Some(name) = &n.name {
            map.insert("name".into(), name.as_str().into());
        }
        put_properties(&mut map, &n.properties);
        push_json_line(&mut out, map);
    }
    out
}

pub fn write_edges_jsonl<'a>(edges: impl IntoIterator<Item = &'a Edge>) -> String {
    let mut out = String::new();
    for e in edges {
        let mut map = Map::new();
        map.insert("subject".into(), e.subject.as_str().into());
        map.insert("predicate".into(), e.predicate.as_str().into());
        map.insert("object".into(), e.object.as_str().into());
        put_properties(&mut map, &e.properties);
        push_json_line(&mut out, map);
    }
    out
}

pub fn read_nodes(source: &str, format: Format) -> Result<Vec<Node>, KgError> {
    match format {
        Format::Tsv => read_nodes_tsv(source),
        Format::Jsonl => read_nodes_jsonl(source),
    }
}

pub fn read_edges(source: &str, format: Format) -> Result<Vec<Edge>, KgError> {
    match format {
        Format::Tsv => read_edges_tsv(source),
        Format::Jsonl => read_edges_jsonl(source),
    }
}

pub fn write_nodes<'a>(nodes: impl IntoIterator<Item = &'a Node>, format: Format) -> String {
    match format {
        Format::Tsv => write_nodes_tsv(nodes),
        Format::Jsonl => write_nodes_jsonl(nodes),
    }
}

pub fn write_edges<'a>(edges: impl IntoIterator<Item = &'a Edge>, format: Format) -> String {
    match format {
        Format::Tsv => write_edges_tsv(edges),
        Format::Jsonl => write_edges_jsonl(edges),
    }
}
