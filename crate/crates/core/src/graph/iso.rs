use std::collections::BTreeMap;

use super::canon::Indexed;
use super::{EdgeId, Morphism, TypedGraph};
use crate::error::GraphError;

/// Searches for a type- and structure-preserving bijection `g → h`.
///
/// Nodes are assigned in id order, candidates tried in id order, so the
/// result is deterministic. Parallel edges are paired in id order.
pub fn find_isomorphism(g: &TypedGraph, h: &TypedGraph) -> Result<Option<Morphism>, GraphError> {
    if g.typegraph().name() != h.typegraph().name() {
        return Err(GraphError::TypeGraphMismatch {
            expected: g.typegraph().name().to_owned(),
            found: h.typegraph().name().to_owned(),
        });
    }
    if g.node_count() != h.node_count() || g.edge_count() != h.edge_count() {
        return Ok(None);
    }
    let gi = Indexed::new(g);
    let hi = Indexed::new(h);
    // joint refinement: both graphs start from the same type ranking
    let (gc, hc) = joint_colors(&gi, &hi);
    let mut gsorted = gc.clone();
    let mut hsorted = hc.clone();
    gsorted.sort_unstable();
    hsorted.sort_unstable();
    if gsorted != hsorted {
        return Ok(None);
    }

    let gm = multiplicities(&gi);
    let hm = multiplicities(&hi);
    let n = gi.ids.len();
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    if !backtrack(0, &gi, &hi, &gc, &hc, &gm, &hm, &mut assign, &mut used) {
        return Ok(None);
    }

    let mut m = Morphism::new();
    for (v, w) in assign.iter().enumerate() {
        m.nodes
            .insert(gi.ids[v].clone(), hi.ids[w.expect("total")].clone());
    }
    // group edges by (src, trg, type) and pair in id order
    let mut groups: BTreeMap<(String, String, String), Vec<EdgeId>> = BTreeMap::new();
    for (id, e) in h.edges() {
        groups
            .entry((e.src.to_string(), e.trg.to_string(), e.ty.clone()))
            .or_default()
            .push(id.clone());
    }
    for v in groups.values_mut() {
        v.reverse();
    }
    for (id, e) in g.edges() {
        let key = (
            m.nodes[&e.src].to_string(),
            m.nodes[&e.trg].to_string(),
            e.ty.clone(),
        );
        let img = groups
            .get_mut(&key)
            .and_then(Vec::pop)
            .expect("multiplicities agree");
        m.edges.insert(id.clone(), img);
    }
    Ok(Some(m))
}

/// Convenience wrapper; mismatched type graphs count as non-isomorphic.
pub fn are_isomorphic(g: &TypedGraph, h: &TypedGraph) -> bool {
    matches!(find_isomorphism(g, h), Ok(Some(_)))
}

fn joint_colors(gi: &Indexed, hi: &Indexed) -> (Vec<u32>, Vec<u32>) {
    // Refine each side independently but from a shared type ranking; since
    // colours are ranks of sorted signatures, they coincide on isomorphic
    // inputs. A mismatch only ever prunes non-isomorphic pairs.
    let mut all_types: Vec<&str> = gi.types.iter().chain(&hi.types).map(String::as_str).collect();
    all_types.sort_unstable();
    all_types.dedup();
    let rank = |t: &str| all_types.binary_search(&t).expect("present") as u32;
    let g0 = gi.types.iter().map(|t| rank(t)).collect();
    let h0 = hi.types.iter().map(|t| rank(t)).collect();
    (gi.refine(g0), hi.refine(h0))
}

type Mult = BTreeMap<(usize, usize, String), usize>;

fn multiplicities(ix: &Indexed) -> Mult {
    let mut m = Mult::new();
    for (s, t, ty) in &ix.edges {
        *m.entry((*s, *t, ty.clone())).or_default() += 1;
    }
    m
}

fn edges_between<'a>(m: &Mult, ix: &'a Indexed, a: usize, b: usize) -> Vec<(&'a str, usize)> {
    let mut v: Vec<(&str, usize)> = ix.out[a]
        .iter()
        .filter(|&&e| ix.edges[e].1 == b)
        .map(|&e| ix.edges[e].2.as_str())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .map(|ty| (ty, m[&(a, b, ty.to_owned())]))
        .collect();
    v.sort_unstable();
    v
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    v: usize,
    gi: &Indexed,
    hi: &Indexed,
    gc: &[u32],
    hc: &[u32],
    gm: &Mult,
    hm: &Mult,
    assign: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
) -> bool {
    if v == gi.ids.len() {
        return true;
    }
    for w in 0..hi.ids.len() {
        if used[w] || gc[v] != hc[w] || gi.types[v] != hi.types[w] {
            continue;
        }
        // self loops, then every already-assigned neighbour in both directions
        if edges_between(gm, gi, v, v) != edges_between(hm, hi, w, w) {
            continue;
        }
        let consistent = (0..v).all(|u| {
            let x = assign[u].expect("assigned");
            edges_between(gm, gi, v, u) == edges_between(hm, hi, w, x)
                && edges_between(gm, gi, u, v) == edges_between(hm, hi, x, w)
        });
        if !consistent {
            continue;
        }
        assign[v] = Some(w);
        used[w] = true;
        if backtrack(v + 1, gi, hi, gc, hc, gm, hm, assign, used) {
            return true;
        }
        assign[v] = None;
        used[w] = false;
    }
    false
}
