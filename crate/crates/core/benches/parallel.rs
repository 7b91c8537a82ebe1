//! Validation and query matching with one job against all available cores.
//! Build with `--no-default-features` to measure the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kgschema::kg::PUBLICATIONS;
use kgschema::{
    build_closure, build_graph, expand_query, match_query, parse_curie, parse_query, parse_schema, seed,
    validate_graph, Edge, KnowledgeGraph, Node,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [(&str, &str); 4] = [
    ("Gene", "NCBIGene"),
    ("Protein", "UniProtKB"),
    ("SmallMolecule", "CHEMBL.COMPOUND"),
    ("Disease", "MONDO"),
];

const PREDICATES: [&str; 5] = [
    "related_to",
    "interacts_with",
    "positively_regulates",
    "negatively_regulates",
    "associated_with",
];

fn graph(nodes: usize, edges: usize) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let id = |i: usize| parse_curie(&format!("{}:{i}", KINDS[i % KINDS.len()].1)).unwrap();
    let node_rows = (0..nodes)
        .map(|i| Node::new(id(i), [KINDS[i % KINDS.len()].0]))
        .collect();
    let edge_rows = (0..edges)
        .map(|j| {
            let p = PREDICATES[rng.gen_range(0..PREDICATES.len())];
            let mut e = Edge::new(id(rng.gen_range(0..nodes)), p, id(rng.gen_range(0..nodes)));
            e.properties.insert(PUBLICATIONS.into(), vec![format!("PMID:{j}")]);
            e
        })
        .collect();
    build_graph(node_rows, edge_rows, true).unwrap()
}

fn job_counts() -> Vec<usize> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cores > 1 {
        vec![1, cores]
    } else {
        vec![1]
    }
}

fn bench_validate(c: &mut Criterion) {
    let doc = parse_schema(seed::SEED_SCHEMA).unwrap();
    let index = build_closure(&doc).unwrap();
    let kg = graph(20_000, 100_000);
    let mut group = c.benchmark_group("validate_graph");
    group.sample_size(10);
    for jobs in job_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(jobs), &jobs, |b, &jobs| {
            b.iter(|| validate_graph(&kg, &doc, &index, jobs))
        });
    }
    group.finish();
}

fn bench_match(c: &mut Criterion) {
    let doc = parse_schema(seed::SEED_SCHEMA).unwrap();
    let index = build_closure(&doc).unwrap();
    let kg = graph(5_000, 25_000);
    let query = "?g:Gene -[related_to]-> ?p:Protein -[interacts_with]-> ?c:SmallMolecule";
    let qg = expand_query(&parse_query(query, &index).unwrap(), &index).unwrap();
    let mut group = c.benchmark_group("match_query");
    group.sample_size(10);
    for jobs in job_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(jobs), &jobs, |b, &jobs| {
            b.iter(|| match_query(&qg, &kg, &doc, &index, jobs))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_validate, bench_match);
criterion_main!(benches);
