//! Command-line front end: validate, normalize, query, expand, stats and
//! convert over schema files and TSV/JSONL graph files.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use kgschema::identifiers::{load_equivalences, Normalizer};
use kgschema::kg::{graph_stats, read_edges, read_nodes, write_edges, write_nodes, Format};
use kgschema::schema::{parse_schema_with, ParseOptions, SCHEMA_FORMAT_VERSION};
use kgschema::{
    build_closure, build_graph, expand_predicates, expand_query, match_query, parse_curie, parse_query, validate_graph,
    validate_schema, ClosureIndex, KnowledgeGraph, SchemaDocument, Severity,
};

/// Supplies `--schema` when the flag is absent.
pub const SCHEMA_ENV: &str = "KGSCHEMA_DEFAULT_SCHEMA";

/// Exit status when the inputs were processed and no domain failures found.
pub const EXIT_OK: i32 = 0;
/// Exit status when the inputs contain domain-level failures.
pub const EXIT_FAILURES: i32 = 1;
/// Exit status for usage errors and tool failures.
pub const EXIT_TOOL: i32 = 2;

fn version() -> String {
    format!("{} (schema format {SCHEMA_FORMAT_VERSION})", env!("CARGO_PKG_VERSION"))
}

#[derive(Parser, Debug)]
#[command(name = "kgschema", version = version(), arg_required_else_help = true)]
#[command(about = "Validate, normalize and query knowledge graphs against a class hierarchy schema")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a graph against the schema and print a JSONL violation report.
    Validate {
        #[command(flatten)]
        schema: SchemaArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        jobs: JobsArgs,
    },
    /// Map CURIEs read from standard input to their preferred identifiers.
    Normalize {
        #[command(flatten)]
        schema: SchemaArgs,
        /// Equivalence table: category list, tab, `|`-joined CURIEs per line.
        #[arg(long)]
        equivalences: PathBuf,
    },
    /// Match a query against a graph and print one JSON binding per line.
    Query {
        #[command(flatten)]
        schema: SchemaArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        jobs: JobsArgs,
        /// A query file, or the query text itself.
        #[arg(long)]
        query: String,
    },
    /// Print a predicate and all of its descendants, sorted.
    Expand {
        #[command(flatten)]
        schema: SchemaArgs,
        /// May be repeated; the union of expansions is printed.
        #[arg(long, required = true)]
        predicate: Vec<String>,
    },
    /// Print node and edge counts as JSON.
    Stats {
        #[command(flatten)]
        schema: SchemaArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Rewrite a nodes/edges pair in another format as sibling files.
    Convert {
        #[command(flatten)]
        graph: GraphArgs,
        /// Target format.
        #[arg(long, alias = "format")]
        to: Format,
        /// Directory for the output files; defaults to each input's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Add every ancestor class to each node's categories.
        #[arg(long)]
        close_categories: bool,
        /// Schema used by --close-categories.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, conflicts_with = "strict")]
        lax: bool,
    },
}

#[derive(Args, Debug)]
struct SchemaArgs {
    /// Schema file; falls back to $KGSCHEMA_DEFAULT_SCHEMA.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Accept unknown schema keys with a warning.
    #[arg(long)]
    lax: bool,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Nodes file (.tsv or .jsonl).
    #[arg(long)]
    nodes: PathBuf,
    /// Edges file (.tsv or .jsonl).
    #[arg(long)]
    edges: PathBuf,
    /// Treat an edge to a missing node as fatal.
    #[arg(long, conflicts_with = "lax")]
    strict: bool,
}

#[derive(Args, Debug)]
struct JobsArgs {
    /// Worker threads for validation and matching.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

impl JobsArgs {
    fn get(&self) -> usize {
        match self.jobs {
            Some(n) => n as usize,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

struct Io<'a> {
    env: &'a dyn Fn(&str) -> Option<String>,
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit status.
pub fn run<I, T>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_TOOL
                }
            };
            return code;
        }
    };
    let mut io = Io {
        env,
        stdin,
        stdout,
        stderr,
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e:#}");
            EXIT_TOOL
        }
    }
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<i32> {
    match command {
        Command::Validate { schema, graph, jobs } => {
            let (doc, index) = load_schema(&schema, io)?;
            let Some(kg) = load_graph(&graph, io)? else {
                return Ok(EXIT_FAILURES);
            };
            let report = validate_graph(&kg, &doc, &index, jobs.get());
            io.stdout.write_all(report.to_jsonl().as_bytes())?;
            writeln!(io.stderr, "{} errors, {} warnings", report.errors(), report.warnings())?;
            Ok(if report.has_errors() { EXIT_FAILURES } else { EXIT_OK })
        }
        Command::Normalize { schema, equivalences } => normalize(&schema, &equivalences, io),
        Command::Query {
            schema,
            graph,
            jobs,
            query,
        } => {
            let (doc, index) = load_schema(&schema, io)?;
            let text = if Path::new(&query).is_file() {
                fs::read_to_string(&query).with_context(|| format!("reading {query}"))?
            } else {
                query
            };
            let qg = parse_query(&text, &index).and_then(|q| expand_query(&q, &index))?;
            let Some(kg) = load_graph(&graph, io)? else {
                return Ok(EXIT_FAILURES);
            };
            let bindings = match_query(&qg, &kg, &doc, &index, jobs.get());
            for b in &bindings {
                writeln!(io.stdout, "{}", serde_json::to_string(b)?)?;
            }
            writeln!(io.stderr, "{} bindings", bindings.len())?;
            Ok(EXIT_OK)
        }
        Command::Expand { schema, predicate } => {
            let (_, index) = load_schema(&schema, io)?;
            for p in expand_predicates(&index, &predicate)? {
                writeln!(io.stdout, "{p}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Stats { schema, graph } => {
            let (_, index) = load_schema(&schema, io)?;
            let Some(kg) = load_graph(&graph, io)? else {
                return Ok(EXIT_FAILURES);
            };
            writeln!(io.stdout, "{}", serde_json::to_string(&graph_stats(&kg, &index))?)?;
            Ok(EXIT_OK)
        }
        Command::Convert {
            graph,
            to,
            out_dir,
            close_categories,
            schema,
            lax,
        } => {
            let index = if close_categories {
                Some(load_schema(&SchemaArgs { schema, lax }, io)?.1)
            } else {
                None
            };
            convert(&graph, to, out_dir.as_deref(), index.as_ref(), io)
        }
    }
}

fn load_schema(args: &SchemaArgs, io: &mut Io<'_>) -> Result<(SchemaDocument, ClosureIndex)> {
    let path = match &args.schema {
        Some(p) => p.clone(),
        None => match (io.env)(SCHEMA_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => bail!("no schema given; pass --schema or set {SCHEMA_ENV}"),
        },
    };
    let source = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let options = ParseOptions {
        lax: args.lax,
        ..Default::default()
    };
    let (doc, warnings) =
        parse_schema_with(&source, &options).with_context(|| format!("parsing {}", path.display()))?;
    for w in warnings {
        writeln!(io.stderr, "warning: {}:{}: {}", path.display(), w.line, w.message)?;
    }
    for v in validate_schema(&doc).iter().filter(|v| v.severity == Severity::Warning) {
        writeln!(io.stderr, "warning: {v}")?;
    }
    let index = build_closure(&doc).with_context(|| format!("checking {}", path.display()))?;
    Ok((doc, index))
}

fn format_of(path: &Path) -> Result<Format> {
    Format::from_path(&path.to_string_lossy())
        .with_context(|| format!("cannot tell the format of {} from its extension", path.display()))
}

fn read_graph_parts(args: &GraphArgs) -> Result<(Vec<kgschema::Node>, Vec<kgschema::Edge>)> {
    let read = |path: &Path| fs::read_to_string(path).with_context(|| format!("reading {}", path.display()));
    let nodes = read_nodes(&read(&args.nodes)?, format_of(&args.nodes)?)
        .with_context(|| format!("in {}", args.nodes.display()))?;
    let edges = read_edges(&read(&args.edges)?, format_of(&args.edges)?)
        .with_context(|| format!("in {}", args.edges.display()))?;
    Ok((nodes, edges))
}

/// Loads the graph. Under `--strict` a dangling edge is reported and yields
/// `None`.
fn load_graph(args: &GraphArgs, io: &mut Io<'_>) -> Result<Option<KnowledgeGraph>> {
    let (nodes, edges) = read_graph_parts(args)?;
    match build_graph(nodes, edges, args.strict) {
        Ok(kg) => {
            if !kg.dangling().is_empty() {
                writeln!(
                    io.stderr,
                    "warning: {} edges reference missing nodes",
                    kg.dangling().len()
                )?;
            }
            Ok(Some(kg))
        }
        Err(e) => {
            writeln!(io.stderr, "error: {e}")?;
            Ok(None)
        }
    }
}

fn normalize(schema: &SchemaArgs, equivalences: &Path, io: &mut Io<'_>) -> Result<i32> {
    let (doc, index) = load_schema(schema, io)?;
    let source = fs::read_to_string(equivalences).with_context(|| format!("reading {}", equivalences.display()))?;
    let table = load_equivalences(&source).with_context(|| format!("in {}", equivalences.display()))?;
    let normalizer = Normalizer::new(&table, &doc, &index);
    for w in normalizer.warnings() {
        writeln!(io.stderr, "warning: {w}")?;
    }
    let (mut read, mut rewritten, mut unknown, mut malformed) = (0, 0, 0, 0);
    for (i, line) in BufReader::new(&mut *io.stdin).lines().enumerate() {
        let line = line.context("reading standard input")?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        read += 1;
        match parse_curie(text) {
            Ok(c) => {
                let out = normalizer.normalize(&c);
                if normalizer.lookup(&c).is_none() {
                    unknown += 1;
                } else if out != c {
                    rewritten += 1;
                }
                writeln!(io.stdout, "{out}")?;
            }
            Err(e) => {
                malformed += 1;
                writeln!(io.stderr, "error: line {}: {e}", i + 1)?;
                // Echo the line so output stays aligned with input.
                writeln!(io.stdout, "{text}")?;
            }
        }
    }
    writeln!(
        io.stderr,
        "read {read}, rewritten {rewritten}, unknown {unknown}, malformed {malformed}"
    )?;
    Ok(if malformed > 0 { EXIT_FAILURES } else { EXIT_OK })
}

fn sibling(input: &Path, to: Format, out_dir: Option<&Path>) -> Result<PathBuf> {
    let stem = input
        .file_stem()
        .with_context(|| format!("{} has no file name", input.display()))?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let out = dir.join(stem).with_extension(to.extension());
    if out == input {
        bail!("{} is already {to}; refusing to overwrite it", input.display());
    }
    Ok(out)
}

fn convert(
    args: &GraphArgs,
    to: Format,
    out_dir: Option<&Path>,
    index: Option<&ClosureIndex>,
    io: &mut Io<'_>,
) -> Result<i32> {
    let nodes_out = sibling(&args.nodes, to, out_dir)?;
    let edges_out = sibling(&args.edges, to, out_dir)?;
    let Some(mut kg) = load_graph(args, io)? else {
        return Ok(EXIT_FAILURES);
    };
    if let Some(index) = index {
        kg.close_categories(index);
    }
    fs::write(&nodes_out, write_nodes(kg.nodes(), to)).with_context(|| format!("writing {}", nodes_out.display()))?;
    fs::write(&edges_out, write_edges(kg.all_edges(), to))
        .with_context(|| format!("writing {}", edges_out.display()))?;
    writeln!(io.stdout, "{}", nodes_out.display())?;
    writeln!(io.stdout, "{}", edges_out.display())?;
    Ok(EXIT_OK)
}
