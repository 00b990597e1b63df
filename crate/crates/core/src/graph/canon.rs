//! Colour refinement and canonical labelling for small typed graphs.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use super::{NodeId, TypedGraph};

pub(crate) struct Indexed {
    pub ids: Vec<NodeId>,
    pub types: Vec<String>,
    /// (src, trg, type) per edge, in edge-id order
    pub edges: Vec<(usize, usize, String)>,
    pub out: Vec<Vec<usize>>,
    pub inc: Vec<Vec<usize>>,
}

impl Indexed {
    pub fn new(g: &TypedGraph) -> Self {
        let ids: Vec<NodeId> = g.node_ids().cloned().collect();
        let pos: BTreeMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let types = g.nodes().map(|(_, t)| t.to_owned()).collect();
        let mut out = vec![Vec::new(); ids.len()];
        let mut inc = vec![Vec::new(); ids.len()];
        let mut edges = Vec::with_capacity(g.edge_count());
        for (_, e) in g.edges() {
            let (s, t) = (pos[&e.src], pos[&e.trg]);
            out[s].push(edges.len());
            inc[t].push(edges.len());
            edges.push((s, t, e.ty.clone()));
        }
        Indexed {
            ids,
            types,
            edges,
            out,
            inc,
        }
    }

    fn signature(&self, v: usize, colors: &[u32]) -> (u32, Vec<(u8, &str, u32)>) {
        let mut nb: Vec<(u8, &str, u32)> = self.out[v]
            .iter()
            .map(|&e| (0, self.edges[e].2.as_str(), colors[self.edges[e].1]))
            .chain(
                self.inc[v]
                    .iter()
                    .map(|&e| (1, self.edges[e].2.as_str(), colors[self.edges[e].0])),
            )
            .collect();
        nb.sort_unstable();
        (colors[v], nb)
    }

    /// Iterated colour refinement starting from `colors`; returns a stable
    /// colouring whose values are ranks of sorted signatures, so equal
    /// structure yields equal colours across graphs.
    pub fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut classes = count_distinct(&colors);
        loop {
            let sigs: Vec<_> = (0..self.ids.len()).map(|v| self.signature(v, &colors)).collect();
            let ranks: BTreeMap<_, u32> = sigs
                .iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), i as u32))
                .collect();
            let next: Vec<u32> = sigs.iter().map(|s| ranks[s]).collect();
            let n = count_distinct(&next);
            colors = next;
            if n == classes {
                return colors;
            }
            classes = n;
        }
    }

    pub fn type_colors(&self) -> Vec<u32> {
        let ranks: BTreeMap<&str, u32> = self
            .types
            .iter()
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, i as u32))
            .collect();
        self.types.iter().map(|t| ranks[t.as_str()]).collect()
    }

    fn neighbourhood(&self, v: usize) -> BTreeSet<(u8, &str, usize)> {
        self.out[v]
            .iter()
            .map(|&e| (0, self.edges[e].2.as_str(), self.edges[e].1))
            .chain(
                self.inc[v]
                    .iter()
                    .map(|&e| (1, self.edges[e].2.as_str(), self.edges[e].0)),
            )
            .collect()
    }
}

fn count_distinct(c: &[u32]) -> usize {
    c.iter().collect::<BTreeSet<_>>().len()
}

/// Iso-invariant fingerprint: equal for isomorphic graphs, usually distinct
/// otherwise. Use it to bucket graphs before an exact isomorphism test.
pub fn invariant_hash(g: &TypedGraph) -> u64 {
    let ix = Indexed::new(g);
    let colors = ix.refine(ix.type_colors());
    let mut sigs: Vec<_> = (0..ix.ids.len())
        .map(|v| (ix.types[v].as_str(), ix.signature(v, &colors)))
        .collect();
    sigs.sort_unstable();
    let mut h = DefaultHasher::new();
    g.typegraph().name().hash(&mut h);
    ix.edges.len().hash(&mut h);
    sigs.hash(&mut h);
    h.finish()
}

/// A canonical labelling: `code` is identical for isomorphic graphs and
/// `order` lists the original node ids in canonical position order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub code: CanonicalCode,
    pub order: Vec<NodeId>,
}

/// Node types in canonical order, then sorted `(src, trg, type)` triples.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    pub node_types: Vec<String>,
    pub edges: Vec<(usize, usize, String)>,
}

impl CanonicalForm {
    /// Copy of `g` with nodes renamed `c0, c1, …` and edges `d0, d1, …` in
    /// canonical order.
    pub fn relabel(&self, g: &TypedGraph) -> TypedGraph {
        let mut out = TypedGraph::new(g.typegraph().clone());
        let pos: BTreeMap<&NodeId, usize> =
            self.order.iter().enumerate().map(|(i, n)| (n, i)).collect();
        for (i, ty) in self.code.node_types.iter().enumerate() {
            out.add_node(format!("c{i}"), ty.clone()).expect("fresh id");
        }
        debug_assert_eq!(pos.len(), self.order.len());
        for (i, (s, t, ty)) in self.code.edges.iter().enumerate() {
            out.add_edge(format!("d{i}"), format!("c{s}"), format!("c{t}"), ty.clone())
                .expect("endpoints exist");
        }
        out
    }
}

/// Computes a canonical form by colour refinement with individualisation of
/// the first non-singleton cell, keeping the lexicographically least code.
/// Cells whose members have identical neighbourhoods are individualised once.
pub fn canonical_form(g: &TypedGraph) -> CanonicalForm {
    let ix = Indexed::new(g);
    let start = ix.refine(ix.type_colors());
    let mut best: Option<(CanonicalCode, Vec<usize>)> = None;
    search(&ix, start, &mut best);
    let (code, perm) = best.expect("at least one leaf");
    CanonicalForm {
        code,
        order: perm.into_iter().map(|i| ix.ids[i].clone()).collect(),
    }
}

fn search(ix: &Indexed, colors: Vec<u32>, best: &mut Option<(CanonicalCode, Vec<usize>)>) {
    let mut cells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (v, c) in colors.iter().enumerate() {
        cells.entry(*c).or_default().push(v);
    }
    let Some(cell) = cells.values().find(|c| c.len() > 1) else {
        let mut order: Vec<usize> = (0..ix.ids.len()).collect();
        order.sort_by_key(|&v| colors[v]);
        let code = encode(ix, &order);
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            *best = Some((code, order));
        }
        return;
    };
    let twins = {
        let first = ix.neighbourhood(cell[0]);
        cell.iter().all(|&v| ix.neighbourhood(v) == first)
            && cell.iter().all(|&v| !first.iter().any(|&(_, _, w)| w == v))
    };
    let tries: &[usize] = if twins { &cell[..1] } else { cell };
    for &v in tries {
        let init: Vec<u32> = colors
            .iter()
            .enumerate()
            .map(|(w, &c)| if w == v { c * 2 } else { c * 2 + 1 })
            .collect();
        search(ix, ix.refine(init), best);
    }
}

fn encode(ix: &Indexed, order: &[usize]) -> CanonicalCode {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut edges: Vec<(usize, usize, String)> = ix
        .edges
        .iter()
        .map(|(s, t, ty)| (pos[*s], pos[*t], ty.clone()))
        .collect();
    edges.sort();
    CanonicalCode {
        node_types: order.iter().map(|&v| ix.types[v].clone()).collect(),
        edges,
    }
}
