//! Independent reference implementations used as test oracles, plus random
//! graph and rule generators.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdm::graph::{EdgeId, Morphism, NodeId, TypeGraph, TypedGraph};
use sdm::spo::{Mark, Rule, RuleBuilder};
use sdm::syntax::{CF_NODE, FAILURE, NEXT, START_NODE, STOP_NODE, SUCCESS};

/// Fixtures live in the core crate; other crates reach them through `..`.
pub fn fixture_path(name: &str) -> String {
    let here = env!("CARGO_MANIFEST_DIR");
    let own = format!("{here}/fixtures");
    let dir = if std::path::Path::new(&own).is_dir() { own } else { format!("{here}/../core/fixtures") };
    format!("{dir}/{name}")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// `A`, `B <: A` and `C`; `r: A -> A`, `s: A -> C`.
pub fn test_typegraph() -> Arc<TypeGraph> {
    Arc::new(
        TypeGraph::new(
            "T",
            [("A", None), ("B", Some("A")), ("C", None)],
            [("r", "A", "A"), ("s", "A", "C")],
        )
        .unwrap(),
    )
}

const TYPES: [&str; 3] = ["A", "B", "C"];

fn edge_type_for(tg: &TypeGraph, src: &str, trg: &str, rng: &mut ChaCha8Rng) -> Option<&'static str> {
    let ok: Vec<&'static str> = ["r", "s"]
        .into_iter()
        .filter(|e| {
            let et = tg.edge_type(e).unwrap();
            tg.conforms(src, &et.src) && tg.conforms(trg, &et.trg)
        })
        .collect();
    ok.choose(rng).copied()
}

/// A random well-typed host graph with `1..=max_nodes` nodes.
pub fn random_graph(seed: u64, max_nodes: usize) -> TypedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = test_typegraph();
    let mut g = TypedGraph::new(tg.clone());
    let n = rng.random_range(1..=max_nodes);
    let types: Vec<&str> = (0..n).map(|_| *TYPES.choose(&mut rng).unwrap()).collect();
    for (i, t) in types.iter().enumerate() {
        g.add_node(format!("h{i}"), *t).unwrap();
    }
    let m = rng.random_range(0..=2 * n);
    for k in 0..m {
        let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
        if let Some(ty) = edge_type_for(&tg, types[s], types[t], &mut rng) {
            g.add_edge(format!("f{k}"), format!("h{s}"), format!("h{t}"), ty).unwrap();
        }
    }
    g
}

/// A random rule with one to three left-hand side nodes, some deletions, up
/// to two created nodes and optionally a one-node NAC.
pub fn random_rule(seed: u64, with_nac: bool) -> Rule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = test_typegraph();
    let mut b = RuleBuilder::new(format!("random-{seed}"), &tg);
    let k = rng.random_range(1..=3);
    let mut nodes: Vec<(String, &str, Mark)> = Vec::new();
    for i in 0..k {
        let mark = if rng.random_bool(0.35) { Mark::Delete } else { Mark::Keep };
        nodes.push((format!("l{i}"), *TYPES.choose(&mut rng).unwrap(), mark));
    }
    for i in 0..rng.random_range(0..=2) {
        nodes.push((format!("c{i}"), *TYPES.choose(&mut rng).unwrap(), Mark::Create));
    }
    for (id, ty, mark) in &nodes {
        b = b.node(id, ty, *mark);
    }
    let mut eid = 0;
    for _ in 0..rng.random_range(0..=3) {
        let (si, ti) = (rng.random_range(0..nodes.len()), rng.random_range(0..nodes.len()));
        let (s, t) = (&nodes[si], &nodes[ti]);
        let Some(ety) = edge_type_for(&tg, s.1, t.1, &mut rng) else { continue };
        let in_l = |m: Mark| matches!(m, Mark::Keep | Mark::Delete);
        let created = s.2 == Mark::Create || t.2 == Mark::Create;
        let deleted = s.2 == Mark::Delete || t.2 == Mark::Delete;
        if created && deleted {
            continue;
        }
        let mark = if created {
            Mark::Create
        } else if deleted {
            Mark::Delete
        } else {
            *[Mark::Keep, Mark::Delete, Mark::Create].choose(&mut rng).unwrap()
        };
        debug_assert!(mark == Mark::Create || (in_l(s.2) && in_l(t.2)));
        b = b.edge_with_id(&format!("x{eid}"), &s.0, ety, &t.0, mark);
        eid += 1;
    }
    if with_nac {
        let anchor = &nodes[0];
        let nty = *TYPES.choose(&mut rng).unwrap();
        if let Some(ety) = edge_type_for(&tg, anchor.1, nty, &mut rng) {
            b = b
                .forbid(0, "forbidden", nty)
                .edge_with_id("nx", &anchor.0, ety, "forbidden", Mark::Forbid(0));
        }
    }
    b.build().unwrap()
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

type EdgeKey = (usize, usize, String);

fn edge_multiset(g: &TypedGraph, index: &BTreeMap<&NodeId, usize>, perm: Option<&[usize]>) -> Vec<EdgeKey> {
    let p = |i: usize| perm.map_or(i, |p| p[i]);
    let mut v: Vec<EdgeKey> = g
        .edges()
        .map(|(_, e)| (p(index[&e.src]), p(index[&e.trg]), e.ty.clone()))
        .collect();
    v.sort();
    v
}

/// Isomorphism by trying every node bijection.
pub fn brute_isomorphic(g: &TypedGraph, h: &TypedGraph) -> bool {
    if g.node_count() != h.node_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    let gi: Vec<(&NodeId, &str)> = g.nodes().collect();
    let hi: Vec<(&NodeId, &str)> = h.nodes().collect();
    let gx: BTreeMap<&NodeId, usize> = gi.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    let hx: BTreeMap<&NodeId, usize> = hi.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    let target = edge_multiset(h, &hx, None);
    permutations(gi.len()).into_iter().any(|p| {
        (0..gi.len()).all(|i| gi[i].1 == hi[p[i]].1) && edge_multiset(g, &gx, Some(&p)) == target
    })
}

/// Every total injective type-respecting morphism `L -> G`, ignoring NACs.
/// Nodes may map to subtypes, edges need the exact type.
pub fn brute_matches(rule: &Rule, g: &TypedGraph) -> BTreeSet<Morphism> {
    let l = rule.lhs();
    let tg = g.typegraph();
    let ln: Vec<(&NodeId, &str)> = l.nodes().collect();
    let hn: Vec<(&NodeId, &str)> = g.nodes().collect();
    let mut out = BTreeSet::new();
    if ln.len() > hn.len() {
        return out;
    }
    for p in permutations(hn.len()) {
        let nodes: BTreeMap<NodeId, NodeId> = ln
            .iter()
            .enumerate()
            .map(|(i, (n, _))| ((*n).clone(), hn[p[i]].0.clone()))
            .collect();
        if !ln.iter().enumerate().all(|(i, (_, t))| tg.conforms(hn[p[i]].1, t)) {
            continue;
        }
        let le: Vec<(&EdgeId, _)> = l.edges().collect();
        let mut partial = vec![BTreeMap::new()];
        for (lid, le) in &le {
            let mut next = Vec::new();
            for acc in &partial {
                for (hid, he) in g.edges() {
                    let used = acc.values().any(|v: &EdgeId| v == hid);
                    if !used && he.ty == le.ty && he.src == nodes[&le.src] && he.trg == nodes[&le.trg] {
                        let mut a = acc.clone();
                        a.insert((*lid).clone(), hid.clone());
                        next.push(a);
                    }
                }
            }
            partial = next;
        }
        for edges in partial {
            out.insert(Morphism {
                nodes: nodes.clone(),
                edges,
            });
        }
    }
    out
}

/// The single-pushout result written out directly: drop the images of
/// deleted elements and every edge left dangling, then glue in the created
/// part of `R`.
pub fn naive_pushout(rule: &Rule, m: &Morphism, g: &TypedGraph) -> TypedGraph {
    let l = rule.lhs();
    let r = rule.rhs();
    let map = rule.mapping();
    let del_nodes: BTreeSet<&NodeId> = l
        .node_ids()
        .filter(|n| !map.nodes.contains_key(*n))
        .map(|n| &m.nodes[n])
        .collect();
    let del_edges: BTreeSet<&EdgeId> = l
        .edges()
        .filter(|(e, _)| !map.edges.contains_key(*e))
        .map(|(e, _)| &m.edges[e])
        .collect();
    let mut h = TypedGraph::new(g.typegraph().clone());
    for (n, t) in g.nodes() {
        if !del_nodes.contains(n) {
            h.add_node(n.clone(), t).unwrap();
        }
    }
    for (id, e) in g.edges() {
        if !del_edges.contains(id) && !del_nodes.contains(&e.src) && !del_nodes.contains(&e.trg) {
            h.add_edge(id.clone(), e.src.clone(), e.trg.clone(), &e.ty).unwrap();
        }
    }
    let inv: BTreeMap<&NodeId, &NodeId> = map.nodes.iter().map(|(a, b)| (b, a)).collect();
    let inv_e: BTreeSet<&EdgeId> = map.edges.values().collect();
    let mut image: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (n, t) in r.nodes() {
        let id = match inv.get(n) {
            Some(ln) => m.nodes[*ln].clone(),
            None => {
                let id = NodeId::new(format!("glued:{n}"));
                h.add_node(id.clone(), t).unwrap();
                id
            }
        };
        image.insert(n.clone(), id);
    }
    for (id, e) in r.edges() {
        if !inv_e.contains(id) {
            h.add_edge(format!("glued:{id}"), image[&e.src].clone(), image[&e.trg].clone(), &e.ty)
                .unwrap();
        }
    }
    h
}

/// One random structural change that keeps the graph well typed.
pub fn mutate_cfg(g: &TypedGraph, rng: &mut ChaCha8Rng) -> TypedGraph {
    let mut h = g.clone();
    let nodes: Vec<NodeId> = h.node_ids().cloned().collect();
    let edges: Vec<_> = h.edges().map(|(id, e)| (id.clone(), e.clone())).collect();
    let types = [NEXT, SUCCESS, FAILURE];
    match rng.random_range(0..6) {
        0 if !edges.is_empty() => {
            let (id, _) = edges.choose(rng).unwrap();
            h.remove_edge(id);
        }
        1 => {
            let (s, t) = (nodes.choose(rng).unwrap(), nodes.choose(rng).unwrap());
            let id = h.fresh_edge_id();
            h.add_edge(id, s.clone(), t.clone(), *types.choose(rng).unwrap()).unwrap();
        }
        2 if !edges.is_empty() => {
            let (id, e) = edges.choose(rng).unwrap();
            h.remove_edge(id);
            let ty = types.iter().find(|t| **t != e.ty).unwrap();
            h.add_edge(id.clone(), e.src.clone(), e.trg.clone(), *ty).unwrap();
        }
        3 if !edges.is_empty() => {
            let (id, e) = edges.choose(rng).unwrap();
            h.remove_edge(id);
            let t = nodes.choose(rng).unwrap();
            h.add_edge(id.clone(), e.src.clone(), t.clone(), &e.ty).unwrap();
        }
        4 => {
            let n = nodes.choose(rng).unwrap();
            h.remove_node(n);
        }
        _ => {
            let n = nodes.choose(rng).unwrap().clone();
            if let Some(t) = h.node_type(n.as_str()).map(str::to_owned) {
                let edges_at: Vec<_> = h
                    .edges()
                    .filter(|(_, e)| e.src == n || e.trg == n)
                    .map(|(id, e)| (id.clone(), e.clone()))
                    .collect();
                h.remove_node(&n);
                let other = [CF_NODE, STOP_NODE, START_NODE].into_iter().find(|x| *x != t).unwrap();
                h.add_node(n.clone(), other).unwrap();
                for (id, e) in edges_at {
                    h.add_edge(id, e.src, e.trg, &e.ty).unwrap();
                }
            }
        }
    }
    h
}
