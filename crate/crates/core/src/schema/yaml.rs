//! Reader and writer for the strict YAML subset used by schema files.
//!
//! Supported: block mappings, block sequences, plain scalars, and single- or
//! double-quoted one-line scalars. Comments start with `#` at line start or
//! after whitespace. A single leading `---` marker is tolerated.
//!
//! Rejected with a syntax error: tabs in indentation, flow collections
//! (`[..]`, `{..}`), anchors, aliases, tags, block scalars (`|`, `>`),
//! multi-document streams and directives.

use super::SchemaError;

/// Position of a token in the source, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Yaml {
    /// A key with no value and no nested block.
    Null(Pos),
    Scalar(String, Pos),
    Seq(Vec<Yaml>, Pos),
    /// Entries in source order. Duplicate keys are kept so the caller can
    /// report them with the right element kind.
    Map(Vec<(String, Pos, Yaml)>, Pos),
}

impl Yaml {
    pub fn pos(&self) -> Pos {
        match self {
            Yaml::Null(p) | Yaml::Scalar(_, p) | Yaml::Seq(_, p) | Yaml::Map(_, p) => *p,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Yaml::Null(_) => "empty value",
            Yaml::Scalar(..) => "scalar",
            Yaml::Seq(..) => "sequence",
            Yaml::Map(..) => "mapping",
        }
    }
}

#[derive(Debug, Clone)]
struct Line {
    number: usize,
    indent: usize,
    /// Content after indentation with trailing comment and whitespace removed.
    text: String,
}

pub struct Reader {
    lines: Vec<Line>,
    cursor: usize,
    max_depth: usize,
    max_key_len: usize,
}

fn syntax(line: usize, column: usize, token: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::Syntax {
        line,
        column,
        token: token.into(),
        message: message.into(),
    }
}

/// Parses `source` into a document tree. An empty document yields an empty
/// mapping.
pub fn parse(source: &str, max_depth: usize, max_key_len: usize) -> Result<Yaml, SchemaError> {
    let mut reader = Reader {
        lines: split_lines(source)?,
        cursor: 0,
        max_depth,
        max_key_len,
    };
    if reader.lines.is_empty() {
        return Ok(Yaml::Map(Vec::new(), Pos { line: 1, column: 1 }));
    }
    let first = reader.lines[0].clone();
    if first.indent != 0 {
        return Err(syntax(
            first.number,
            first.indent + 1,
            &first.text,
            "document must start at column 1",
        ));
    }
    let root = reader.block(0, 1)?;
    if let Some(extra) = reader.lines.get(reader.cursor) {
        return Err(syntax(
            extra.number,
            extra.indent + 1,
            &extra.text,
            "unexpected content after document root",
        ));
    }
    Ok(root)
}

fn split_lines(source: &str) -> Result<Vec<Line>, SchemaError> {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    let mut out = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in source.split('\n').enumerate() {
        let number = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let indent = raw.bytes().take_while(|b| *b == b' ').count();
        let rest = &raw[indent..];
        if rest.starts_with('\t') {
            return Err(syntax(
                number,
                indent + 1,
                "\\t",
                "tab characters are not allowed in indentation",
            ));
        }
        let text = strip_comment(rest, number, indent)?;
        let text = text.trim_end_matches([' ', '\t']);
        if text.is_empty() {
            continue;
        }
        if indent == 0 && (text == "---" || text.starts_with("--- ")) {
            if seen_content || text != "---" {
                return Err(syntax(number, 1, text, "multi-document streams are not supported"));
            }
            continue;
        }
        if indent == 0 && (text == "..." || text.starts_with('%')) {
            return Err(syntax(
                number,
                1,
                text,
                "document end markers and directives are not supported",
            ));
        }
        seen_content = true;
        out.push(Line {
            number,
            indent,
            text: text.to_string(),
        });
    }
    Ok(out)
}

/// Removes a trailing comment, honouring quoted spans.
fn strip_comment(text: &str, line: usize, indent: usize) -> Result<&str, SchemaError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut prev_space = true;
    while i < bytes.len() {
        match bytes[i] {
            b'#' if prev_space => return Ok(&text[..i]),
            q @ (b'"' | b'\'') if prev_space || (i > 0 && matches!(bytes[i - 1], b':' | b'-')) => {
                // Only a quote that opens a scalar starts a quoted span.
                if let Some(end) = find_closing_quote(&bytes[i + 1..], q) {
                    i += end + 2;
                    prev_space = false;
                    continue;
                }
                return Err(syntax(line, indent + i + 1, &text[i..], "unterminated quoted scalar"));
            }
            b' ' | b'\t' => prev_space = true,
            _ => prev_space = false,
        }
        i += 1;
    }
    Ok(text)
}

fn find_closing_quote(bytes: &[u8], quote: u8) -> Option<usize> {
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if quote == b'"' && b == b'\\' {
            i += 2;
            continue;
        }
        if b == quote {
            if quote == b'\'' && bytes.get(i + 1) == Some(&b'\'') {
                i += 2;
                continue;
            }
            return Some(i);
        }
        i += 1;
    }
    None
}

impl Reader {
    fn peek(&self) -> Option<&Line> {
        self.lines.get(self.cursor)
    }

    /// Parses the block starting at the cursor, whose lines sit at `indent`.
    fn block(&mut self, indent: usize, depth: usize) -> Result<Yaml, SchemaError> {
        let line = self.peek().expect("block called at end of input").clone();
        if depth > self.max_depth {
            return Err(SchemaError::NestingTooDeep {
                line: line.number,
                limit: self.max_depth,
            });
        }
        if is_seq_item(&line.text) {
            self.sequence(indent, depth)
        } else {
            self.mapping(indent, depth)
        }
    }

    fn sequence(&mut self, indent: usize, depth: usize) -> Result<Yaml, SchemaError> {
        let start = self
            .peek()
            .map(|l| Pos {
                line: l.number,
                column: l.indent + 1,
            })
            .unwrap();
        let mut items = Vec::new();
        while let Some(line) = self.peek().cloned() {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return Err(syntax(
                    line.number,
                    line.indent + 1,
                    &line.text,
                    "unexpected indentation",
                ));
            }
            if !is_seq_item(&line.text) {
                break;
            }
            let rest = line.text[1..].trim_start_matches(' ');
            let offset = line.text.len() - rest.len();
            if rest.is_empty() {
                self.cursor += 1;
                match self.peek() {
                    Some(next) if next.indent > indent => {
                        let child_indent = next.indent;
                        items.push(self.block(child_indent, depth + 1)?);
                    }
                    _ => items.push(Yaml::Null(Pos {
                        line: line.number,
                        column: line.indent + 1,
                    })),
                }
            } else if split_key(rest).is_some() || is_seq_item(rest) {
                // Compact nested collection: reinterpret the item text as a
                // block that starts at the item's content column.
                let child_indent = indent + offset;
                self.lines[self.cursor] = Line {
                    number: line.number,
                    indent: child_indent,
                    text: rest.to_string(),
                };
                items.push(self.block(child_indent, depth + 1)?);
            } else {
                let pos = Pos {
                    line: line.number,
                    column: indent + offset + 1,
                };
                items.push(Yaml::Scalar(scalar(rest, pos)?, pos));
                self.cursor += 1;
            }
        }
        Ok(Yaml::Seq(items, start))
    }

    fn mapping(&mut self, indent: usize, depth: usize) -> Result<Yaml, SchemaError> {
        let start = self
            .peek()
            .map(|l| Pos {
                line: l.number,
                column: l.indent + 1,
            })
            .unwrap();
        let mut entries = Vec::new();
        while let Some(line) = self.peek().cloned() {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return Err(syntax(
                    line.number,
                    line.indent + 1,
                    &line.text,
                    "unexpected indentation",
                ));
            }
            if is_seq_item(&line.text) {
                return Err(syntax(
                    line.number,
                    line.indent + 1,
                    &line.text,
                    "sequence item inside a mapping",
                ));
            }
            let key_pos = Pos {
                line: line.number,
                column: line.indent + 1,
            };
            let (raw_key, value) = split_key(&line.text)
                .ok_or_else(|| syntax(line.number, line.indent + 1, &line.text, "expected `key: value`"))?;
            let key = scalar(raw_key, key_pos)?;
            if key.is_empty() {
                return Err(syntax(line.number, line.indent + 1, &line.text, "empty mapping key"));
            }
            if key.len() > self.max_key_len {
                return Err(syntax(
                    line.number,
                    line.indent + 1,
                    truncate(&key),
                    format!("identifier longer than {} bytes", self.max_key_len),
                ));
            }
            self.cursor += 1;
            let value_pos = Pos {
                line: line.number,
                column: line.indent + line.text.len() - value.len() + 1,
            };
            let node = if value.is_empty() {
                match self.peek() {
                    Some(next) if next.indent > indent => {
                        let child_indent = next.indent;
                        self.block(child_indent, depth + 1)?
                    }
                    // `key:` followed by a sequence at the same indentation.
                    Some(next) if next.indent == indent && is_seq_item(&next.text) => {
                        self.sequence(indent, depth + 1)?
                    }
                    _ => Yaml::Null(value_pos),
                }
            } else {
                Yaml::Scalar(scalar(value, value_pos)?, value_pos)
            };
            entries.push((key, key_pos, node));
        }
        Ok(Yaml::Map(entries, start))
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(32).collect::<String>() + "..."
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ")
}

/// Splits `key: value` (or `key:`) honouring a quoted key.
fn split_key(text: &str) -> Option<(&str, &str)> {
    let bytes = text.as_bytes();
    let key_end = match bytes.first() {
        Some(q @ (b'"' | b'\'')) => find_closing_quote(&bytes[1..], *q)? + 2,
        _ => 0,
    };
    let mut i = key_end;
    while i < bytes.len() {
        if bytes[i] == b':' && (i + 1 == bytes.len() || bytes[i + 1] == b' ') {
            let value = text[i + 1..].trim_start_matches(' ');
            return Some((&text[..i], value));
        }
        if key_end > 0 {
            // Anything other than `:` right after a quoted key is not a key.
            return None;
        }
        i += 1;
    }
    None
}

/// Decodes a scalar token (plain or quoted).
fn scalar(token: &str, pos: Pos) -> Result<String, SchemaError> {
    let err = |msg: &str| syntax(pos.line, pos.column, token, msg);
    let first = token.as_bytes()[0];
    match first {
        b'"' => {
            let inner = &token[1..];
            let end = find_closing_quote(inner.as_bytes(), b'"').ok_or_else(|| err("unterminated quoted scalar"))?;
            if end + 1 != inner.len() {
                return Err(err("unexpected text after quoted scalar"));
            }
            unescape_double(&inner[..end]).ok_or_else(|| err("invalid escape sequence"))
        }
        b'\'' => {
            let inner = &token[1..];
            let end = find_closing_quote(inner.as_bytes(), b'\'').ok_or_else(|| err("unterminated quoted scalar"))?;
            if end + 1 != inner.len() {
                return Err(err("unexpected text after quoted scalar"));
            }
            Ok(inner[..end].replace("''", "'"))
        }
        b'[' | b'{' => Err(err("flow collections are not supported")),
        b'&' => Err(err("anchors are not supported")),
        b'*' => Err(err("aliases are not supported")),
        b'!' => Err(err("tags are not supported")),
        b'|' | b'>' => Err(err("block scalars are not supported")),
        b'@' | b'`' => Err(err("reserved indicator at start of plain scalar")),
        _ => {
            if token.contains(": ") {
                return Err(err("plain scalar may not contain `: `; quote the value"));
            }
            Ok(token.to_string())
        }
    }
}

fn unescape_double(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '"' => out.push('"'),
            '\\' => out.push('\\'),
            '/' => out.push('/'),
            'n' => out.push('\n'),
            't' => out.push('\t'),
            'r' => out.push('\r'),
            '0' => out.push('\0'),
            _ => return None,
        }
    }
    Some(out)
}

/// Renders `value` as a scalar token that reads back to the same string.
pub fn quote_if_needed(value: &str) -> String {
    if needs_quotes(value) {
        let mut out = String::with_capacity(value.len() + 2);
        out.push('"');
        for c in value.chars() {
            match c {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                '\t' => out.push_str("\\t"),
                '\r' => out.push_str("\\r"),
                '\0' => out.push_str("\\0"),
                c => out.push(c),
            }
        }
        out.push('"');
        out
    } else {
        value.to_string()
    }
}

fn needs_quotes(value: &str) -> bool {
    let Some(first) = value.chars().next() else {
        return true;
    };
    if matches!(
        first,
        '"' | '\'' | '[' | ']' | '{' | '}' | '&' | '*' | '!' | '|' | '>' | '@' | '`' | '#' | '%' | ','
    ) {
        return true;
    }
    if value == "-" || value.starts_with("- ") || value == "---" || value == "..." {
        return true;
    }
    value.starts_with(' ')
        || value.ends_with(' ')
        || value.ends_with(':')
        || value.contains(": ")
        || value.contains(" #")
        || value.chars().any(|c| c.is_control())
}
