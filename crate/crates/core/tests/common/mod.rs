//! Generators and brute-force oracles shared by the integration tests and
//! the acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use indexmap::IndexMap;
use kgschema::hierarchy::all_predicates;
use kgschema::identifiers::{load_equivalences, Clique, EquivalenceTable};
use kgschema::kg::{read_edges_tsv, read_nodes_tsv, PUBLICATIONS};
use kgschema::query::{QueryEdge, QueryNode};
use kgschema::schema::{ClassDefinition, SlotDefinition, SlotKind, ROOT_PREDICATE};
use kgschema::{
    build_closure, build_graph, parse_curie, parse_schema, seed, Binding, ClosureIndex, Curie, Edge, KnowledgeGraph,
    Node, QueryGraph, SchemaDocument,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn seed_schema() -> (SchemaDocument, ClosureIndex) {
    let doc = parse_schema(seed::SEED_SCHEMA).expect("seed parses");
    let index = build_closure(&doc).expect("seed is valid");
    (doc, index)
}

pub fn desk_graph() -> KnowledgeGraph {
    build_graph(desk_nodes(), desk_edges(), true).expect("desk graph is consistent")
}

pub fn desk_nodes() -> Vec<Node> {
    read_nodes_tsv(seed::DESK_NODES).expect("desk nodes parse")
}

pub fn desk_edges() -> Vec<Edge> {
    read_edges_tsv(seed::DESK_EDGES).expect("desk edges parse")
}

pub fn desk_table() -> EquivalenceTable {
    load_equivalences(seed::DESK_EQUIVALENCES).expect("desk equivalences parse")
}

pub fn curie(text: &str) -> Curie {
    parse_curie(text).expect("test CURIE")
}

// ---------------------------------------------------------------------------
// Random schemas

/// A random acyclic schema with up to `max_classes` classes and at most
/// `max_class_edges` class edges counting both `is_a` and mixin links, plus
/// a random predicate tree under the root predicate.
pub fn random_schema(rng: &mut TestRng, max_classes: usize, max_class_edges: usize) -> SchemaDocument {
    let n = rng.gen_range(1..=max_classes);
    let mixin_flags: Vec<bool> = (0..n).map(|i| i > 0 && rng.gen_bool(0.25)).collect();
    let name = |i: usize| {
        if mixin_flags[i] {
            format!("Mixin{i}")
        } else {
            format!("Class{i}")
        }
    };
    let mut doc = SchemaDocument {
        name: "random".into(),
        version: "0.0.1".into(),
        ..Default::default()
    };
    let mut budget = max_class_edges;
    for i in 0..n {
        let mut class = ClassDefinition {
            name: name(i),
            is_mixin: mixin_flags[i],
            ..Default::default()
        };
        // Parents come from earlier classes of the same kind, which keeps
        // the hierarchy acyclic and kind-consistent.
        let same_kind: Vec<usize> = (0..i).filter(|&j| mixin_flags[j] == mixin_flags[i]).collect();
        if budget > 0 && !same_kind.is_empty() && rng.gen_bool(0.8) {
            class.is_a = Some(name(*same_kind.choose(rng).unwrap()));
            budget -= 1;
        }
        let earlier_mixins: Vec<usize> = (0..i).filter(|&j| mixin_flags[j]).collect();
        if !earlier_mixins.is_empty() {
            let k = rng.gen_range(0..=2.min(earlier_mixins.len()));
            for &m in earlier_mixins.choose_multiple(rng, k) {
                if budget == 0 {
                    break;
                }
                if class.is_a.as_deref() != Some(name(m).as_str()) {
                    class.mixins.push(name(m));
                    budget -= 1;
                }
            }
        }
        doc.classes.insert(class.name.clone(), class);
    }
    let predicates = rng.gen_range(1..=12);
    for i in 0..predicates {
        let slot_name = if i == 0 {
            ROOT_PREDICATE.to_string()
        } else {
            format!("pred_{i}")
        };
        let is_a = (i > 0).then(|| {
            let parent = rng.gen_range(0..i);
            if parent == 0 {
                ROOT_PREDICATE.to_string()
            } else {
                format!("pred_{parent}")
            }
        });
        doc.slots.insert(
            slot_name.clone(),
            SlotDefinition {
                name: slot_name,
                description: String::new(),
                is_a,
                slot_kind: SlotKind::Predicate,
                domain: None,
                range: None,
                multivalued: false,
                required: false,
                symmetric: rng.gen_bool(0.3),
                mappings: Vec::new(),
            },
        );
    }
    doc
}

/// Counts `is_a` and mixin links between classes.
pub fn class_edge_count(doc: &SchemaDocument) -> usize {
    doc.classes
        .values()
        .map(|c| usize::from(c.is_a.is_some()) + c.mixins.len())
        .sum()
}

/// Reflexive `is_a` ancestors of `start` by depth-first search.
pub fn dfs_ancestors(doc: &SchemaDocument, start: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start.to_string()];
    while let Some(c) = stack.pop() {
        if seen.insert(c.clone()) {
            if let Some(p) = &doc.classes[&c].is_a {
                stack.push(p.clone());
            }
        }
    }
    seen
}

/// Reflexive `is_a` descendants of `start` by depth-first search over
/// reversed links.
pub fn dfs_descendants(doc: &SchemaDocument, start: &str) -> BTreeSet<String> {
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for c in doc.classes.values() {
        if let Some(p) = &c.is_a {
            children.entry(p).or_default().push(&c.name);
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        if seen.insert(c.to_string()) {
            stack.extend(children.get(c).into_iter().flatten());
        }
    }
    seen
}

/// Mixins reachable from `start` along paths of `is_a` and mixin links
/// that use at least one mixin link.
pub fn dfs_mixin_membership(doc: &SchemaDocument, start: &str) -> BTreeSet<String> {
    let mut seen: HashSet<(String, bool)> = HashSet::new();
    let mut stack = vec![(start.to_string(), false)];
    let mut out = BTreeSet::new();
    while let Some((c, via_mixin)) = stack.pop() {
        if !seen.insert((c.clone(), via_mixin)) {
            continue;
        }
        if via_mixin {
            out.insert(c.clone());
        }
        let class = &doc.classes[&c];
        if let Some(p) = &class.is_a {
            stack.push((p.clone(), via_mixin));
        }
        for m in &class.mixins {
            stack.push((m.clone(), true));
        }
    }
    out
}

/// Reflexive predicate descendants by depth-first search.
pub fn dfs_predicate_descendants(doc: &SchemaDocument, start: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start.to_string()];
    while let Some(p) = stack.pop() {
        if seen.insert(p.clone()) {
            for s in doc.predicates() {
                if s.is_a.as_deref() == Some(p.as_str()) {
                    stack.push(s.name.clone());
                }
            }
        }
    }
    seen
}

/// Compares the closure index against the DFS oracles; returns a
/// description of each disagreement.
pub fn closure_mismatches(doc: &SchemaDocument, index: &ClosureIndex) -> Vec<String> {
    let mut out = Vec::new();
    for name in doc.classes.keys() {
        let ancestors: BTreeSet<String> = index.class_ancestors(name).unwrap_or(&[]).iter().cloned().collect();
        if ancestors != dfs_ancestors(doc, name) {
            out.push(format!("ancestors of {name}"));
        }
        if index.class_descendants(name).cloned().unwrap_or_default() != dfs_descendants(doc, name) {
            out.push(format!("descendants of {name}"));
        }
        if index.mixin_membership(name).cloned().unwrap_or_default() != dfs_mixin_membership(doc, name) {
            out.push(format!("mixin membership of {name}"));
        }
    }
    for p in doc.predicates() {
        if index.predicate_descendants(&p.name).cloned().unwrap_or_default() != dfs_predicate_descendants(doc, &p.name)
        {
            out.push(format!("descendants of predicate {}", p.name));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random graphs and queries over the seed schema

pub fn seed_classes(doc: &SchemaDocument) -> Vec<String> {
    doc.classes.keys().cloned().collect()
}

pub fn seed_predicates(doc: &SchemaDocument) -> Vec<String> {
    doc.predicates().map(|p| p.name.clone()).collect()
}

/// A random graph over the seed schema with up to `max_nodes` nodes. Self
/// loops, parallel edges and mixin-only nodes all occur.
pub fn random_graph(rng: &mut TestRng, doc: &SchemaDocument, max_nodes: usize) -> KnowledgeGraph {
    let classes = seed_classes(doc);
    let predicates = seed_predicates(doc);
    let n = rng.gen_range(1..=max_nodes);
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            let k = rng.gen_range(1..=2);
            let cats: Vec<String> = classes.choose_multiple(rng, k).cloned().collect();
            Node::new(curie(&format!("X:{i}")), cats)
        })
        .collect();
    let m = rng.gen_range(0..=3 * n);
    let edges: Vec<Edge> = (0..m)
        .map(|j| {
            let s = rng.gen_range(0..n);
            let o = rng.gen_range(0..n);
            let p = predicates.choose(rng).unwrap();
            let mut e = Edge::new(curie(&format!("X:{s}")), p.clone(), curie(&format!("X:{o}")));
            e.properties.insert(PUBLICATIONS.into(), vec![format!("PMID:{j}")]);
            e
        })
        .collect();
    build_graph(nodes, edges, true).expect("random graph has no dangling edges")
}

/// A random connected query with two edges and up to three variables.
pub fn random_two_edge_query(rng: &mut TestRng, doc: &SchemaDocument, kg: &KnowledgeGraph) -> QueryGraph {
    let classes = seed_classes(doc);
    let predicates = seed_predicates(doc);
    // Edge endpoint shapes over variables a, b, c.
    let shapes: [[(usize, usize); 2]; 7] = [
        [(0, 1), (1, 2)],
        [(0, 1), (0, 2)],
        [(0, 2), (1, 2)],
        [(0, 1), (1, 0)],
        [(0, 1), (0, 1)],
        [(0, 0), (0, 1)],
        [(0, 1), (2, 1)],
    ];
    let shape = shapes.choose(rng).unwrap();
    let used: BTreeSet<usize> = shape.iter().flat_map(|&(s, o)| [s, o]).collect();
    let var = |i: usize| ["a", "b", "c"][i].to_string();
    let mut qnodes = IndexMap::new();
    for &i in &used {
        let mut q = QueryNode::default();
        if rng.gen_bool(0.15) && kg.node_count() > 0 {
            let pick = rng.gen_range(0..kg.node_count());
            q.id = Some(kg.node_at(pick).id.clone());
        } else if rng.gen_bool(0.45) {
            let k = rng.gen_range(1..=2);
            q.categories = Some(classes.choose_multiple(rng, k).cloned().collect());
        }
        qnodes.insert(var(i), q);
    }
    let qedges = shape
        .iter()
        .map(|&(s, o)| {
            // The root predicate keeps a fair share of queries non-empty.
            let predicates = if rng.gen_bool(0.35) {
                BTreeSet::from(["related_to".to_string()])
            } else {
                let k = rng.gen_range(1..=2);
                predicates.choose_multiple(rng, k).cloned().collect()
            };
            QueryEdge {
                subject: var(s),
                predicates,
                object: var(o),
            }
        })
        .collect();
    QueryGraph { qnodes, qedges }
}

/// A binding reduced to comparable text: bound ids in variable order, then
/// the matched edges' triples in query-edge order.
pub type BindingKey = (Vec<String>, Vec<(String, String, String)>);

pub fn binding_key(b: &Binding) -> BindingKey {
    (
        b.assignments.values().map(|c| c.to_string()).collect(),
        b.evidence
            .iter()
            .map(|e| (e.subject.to_string(), e.matched_predicate.clone(), e.object.to_string()))
            .collect(),
    )
}

/// Brute-force matcher: tries every assignment of graph nodes to the
/// query's variables and every combination of satisfying edges. Works from
/// the unexpanded query and derives all expansions by its own search.
pub fn brute_force_match(qg: &QueryGraph, kg: &KnowledgeGraph, doc: &SchemaDocument) -> Vec<BindingKey> {
    let nodes: Vec<&Node> = kg.nodes().collect();
    let up_closed: Vec<BTreeSet<String>> = nodes
        .iter()
        .map(|n| {
            n.categories
                .iter()
                .filter(|c| doc.classes.contains_key(*c))
                .flat_map(|c| {
                    let mut s = dfs_ancestors(doc, c);
                    s.extend(dfs_mixin_membership(doc, c));
                    s
                })
                .collect()
        })
        .collect();
    let qnode_sets: Vec<Option<BTreeSet<String>>> = qg
        .qnodes
        .values()
        .map(|q| {
            q.categories.as_ref().map(|cats| {
                cats.iter()
                    .flat_map(|c| {
                        if doc.classes[c].is_mixin {
                            doc.classes
                                .keys()
                                .filter(|k| !doc.classes[*k].is_mixin && dfs_mixin_membership(doc, k).contains(c))
                                .cloned()
                                .collect::<BTreeSet<_>>()
                        } else {
                            dfs_descendants(doc, c)
                        }
                    })
                    .collect()
            })
        })
        .collect();
    let fits = |qi: usize, ni: usize| {
        let q = &qg.qnodes[qi];
        q.id.as_ref().is_none_or(|id| *id == nodes[ni].id)
            && qnode_sets[qi]
                .as_ref()
                .is_none_or(|set| !set.is_disjoint(&up_closed[ni]))
    };
    let edge_sets: Vec<BTreeSet<String>> = qg
        .qedges
        .iter()
        .map(|e| {
            e.predicates
                .iter()
                .flat_map(|p| dfs_predicate_descendants(doc, p))
                .collect()
        })
        .collect();

    let k = qg.qnodes.len();
    let n = nodes.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut tuple = vec![0usize; k];
    loop {
        if (0..k).all(|qi| fits(qi, tuple[qi])) {
            // Per query edge: the graph edges that satisfy it under this
            // assignment, each at most once.
            let per_edge: Vec<Vec<&Edge>> = qg
                .qedges
                .iter()
                .enumerate()
                .map(|(qe, e)| {
                    let s = &nodes[tuple[qg.qnodes.get_index_of(&e.subject).unwrap()]].id;
                    let o = &nodes[tuple[qg.qnodes.get_index_of(&e.object).unwrap()]].id;
                    kg.edges()
                        .iter()
                        .filter(|g| edge_sets[qe].contains(&g.predicate))
                        .filter(|g| {
                            let forward = g.subject == *s && g.object == *o;
                            let symmetric = doc.slots.get(&g.predicate).is_some_and(|d| d.symmetric);
                            forward || (symmetric && g.subject == *o && g.object == *s)
                        })
                        .collect()
                })
                .collect();
            let ids: Vec<String> = tuple.iter().map(|&i| nodes[i].id.to_string()).collect();
            let mut combos: Vec<Vec<(String, String, String)>> = vec![Vec::new()];
            for options in &per_edge {
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |g| {
                            let mut next = prefix.clone();
                            next.push((g.subject.to_string(), g.predicate.clone(), g.object.to_string()));
                            next
                        })
                    })
                    .collect();
            }
            out.extend(combos.into_iter().map(|c| (ids.clone(), c)));
        }
        // Advance the odometer.
        let mut pos = 0;
        loop {
            if pos == k {
                out.sort();
                return out;
            }
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Cliques

/// Prefixes for generated identifiers: every `id_prefixes` entry in the
/// seed plus a few that no class lists.
pub fn clique_prefixes(doc: &SchemaDocument) -> Vec<String> {
    let mut set: BTreeSet<String> = doc
        .classes
        .values()
        .flat_map(|c| c.id_prefixes.iter().cloned())
        .collect();
    set.extend(["ZZZ", "AAA", "LOCAL"].map(String::from));
    set.into_iter().collect()
}

/// `count` disjoint random cliques over the seed schema's classes.
pub fn random_cliques(rng: &mut TestRng, doc: &SchemaDocument, count: usize) -> EquivalenceTable {
    let prefixes = clique_prefixes(doc);
    let classes: Vec<String> = doc
        .classes
        .values()
        .filter(|c| !c.is_mixin || rng.gen_bool(0.1))
        .map(|c| c.name.clone())
        .collect();
    let cliques = (0..count)
        .map(|i| {
            let size = rng.gen_range(1..=5);
            let members = (0..size)
                .map(|j| {
                    let p = prefixes.choose(rng).unwrap();
                    curie(&format!("{p}:{i}_{j}"))
                })
                .collect();
            let k = if rng.gen_bool(0.1) { 2 } else { 1 };
            let categories = classes.choose_multiple(rng, k).cloned().collect();
            Clique { members, categories }
        })
        .collect();
    EquivalenceTable::from_cliques(cliques).expect("members are unique by construction")
}

/// The nearest nonempty `id_prefixes` list walking `is_a` upward.
pub fn walk_id_prefixes(doc: &SchemaDocument, class: &str) -> Vec<String> {
    let mut current = Some(class.to_string());
    while let Some(c) = current {
        let def = &doc.classes[&c];
        if !def.id_prefixes.is_empty() {
            return def.id_prefixes.clone();
        }
        current = def.is_a.clone();
    }
    Vec::new()
}

/// Brute-force preferred member: scan every member and keep the one with
/// the smallest (prefix rank, local id); without any ranked member, the
/// smallest text form.
pub fn brute_force_preferred(members: &BTreeSet<Curie>, list: &[String]) -> Curie {
    let mut best: Option<(usize, &str, &Curie)> = None;
    for m in members {
        for (rank, p) in list.iter().enumerate() {
            if p == m.prefix() {
                let cand = (rank, m.local_id(), m);
                if best.is_none_or(|b| (cand.0, cand.1.as_bytes()) < (b.0, b.1.as_bytes())) {
                    best = Some(cand);
                }
            }
        }
    }
    match best {
        Some((_, _, m)) => m.clone(),
        None => members
            .iter()
            .min_by(|a, b| a.as_str().as_bytes().cmp(b.as_str().as_bytes()))
            .unwrap()
            .clone(),
    }
}

// ---------------------------------------------------------------------------
// Desk fixture faults

/// A single-fault mutation of the desk fixture and the violation codes it
/// must produce.
pub struct Fault {
    pub name: &'static str,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub expected: &'static [&'static str],
}

fn edge_mut<'a>(edges: &'a mut [Edge], s: &str, p: &str, o: &str) -> &'a mut Edge {
    edges
        .iter_mut()
        .find(|e| e.subject.as_str() == s && e.predicate == p && e.object.as_str() == o)
        .unwrap_or_else(|| panic!("desk edge {s} {p} {o}"))
}

pub fn desk_faults() -> Vec<Fault> {
    let base_nodes = desk_nodes();
    let base_edges = desk_edges();
    let mut faults = Vec::new();
    let mut add = |name, f: &dyn Fn(&mut Vec<Node>, &mut Vec<Edge>), expected| {
        let mut nodes = base_nodes.clone();
        let mut edges = base_edges.clone();
        f(&mut nodes, &mut edges);
        faults.push(Fault {
            name,
            nodes,
            edges,
            expected,
        });
    };
    const ASPIRIN: &str = "CHEMBL.COMPOUND:CHEMBL25";
    const EPILEPSY: &str = "MONDO:0005027";
    const SEIZURE: &str = "HP:0001250";
    add(
        "unknown predicate",
        &|_, e| edge_mut(e, ASPIRIN, "treats", EPILEPSY).predicate = "causes_xyzzy".into(),
        &["UNKNOWN_PREDICATE"],
    );
    add(
        "reversed has_phenotype",
        &|_, e| {
            let edge = edge_mut(e, EPILEPSY, "has_phenotype", SEIZURE);
            std::mem::swap(&mut edge.subject, &mut edge.object);
        },
        &["DOMAIN_VIOLATION", "RANGE_VIOLATION"],
    );
    add(
        "missing required publications",
        &|_, e| {
            edge_mut(e, EPILEPSY, "has_phenotype", SEIZURE)
                .properties
                .remove(PUBLICATIONS);
        },
        &["MISSING_REQUIRED_EDGE_PROPERTY"],
    );
    add(
        "dangling edge",
        &|n, _| n.retain(|node| node.id.as_str() != ASPIRIN),
        &["DANGLING_EDGE"],
    );
    add(
        "unknown category",
        &|n, _| {
            let caffeine = n
                .iter_mut()
                .find(|x| x.id.as_str() == "CHEMBL.COMPOUND:CHEMBL113")
                .unwrap();
            caffeine.categories.push("DrugXyzzy".into());
        },
        &["UNKNOWN_CATEGORY"],
    );
    add(
        "disallowed id prefix",
        &|n, _| n.push(Node::new(curie("FOO:1"), ["Gene"])),
        &["ID_PREFIX_NOT_ALLOWED"],
    );
    add(
        "mixin-only node",
        &|n, _| n.push(Node::new(curie("NCBIGene:9999"), ["GeneOrGeneProduct"])),
        &["ABSTRACT_MIXIN_INSTANTIATED"],
    );
    add(
        "malformed publication",
        &|_, e| {
            edge_mut(e, "NCBIGene:23221", "genetically_interacts_with", "NCBIGene:3716")
                .properties
                .insert(PUBLICATIONS.into(), vec!["PMID 10000001".into()]);
        },
        &["MALFORMED_PROVENANCE_CURIE"],
    );
    add(
        "treats from a phenotype",
        &|_, e| {
            let mut edge = Edge::new(curie(SEIZURE), "treats", curie(EPILEPSY));
            edge.properties.insert(PUBLICATIONS.into(), vec!["PMID:1".into()]);
            e.push(edge);
        },
        &["DOMAIN_VIOLATION"],
    );
    add(
        "treats a gene",
        &|_, e| {
            let mut edge = Edge::new(curie(ASPIRIN), "treats", curie("NCBIGene:3716"));
            edge.properties.insert(PUBLICATIONS.into(), vec!["PMID:1".into()]);
            e.push(edge);
        },
        &["RANGE_VIOLATION"],
    );
    faults
}

/// All predicate names of the seed, as the root expands to them.
pub fn seed_all_predicates(index: &ClosureIndex) -> BTreeSet<String> {
    all_predicates(index)
}
