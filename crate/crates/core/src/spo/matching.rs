use std::collections::{BTreeMap, BTreeSet};

use super::{Nac, Rule};
use crate::error::RuleError;
use crate::graph::{Edge, EdgeId, Morphism, NodeId, TypedGraph};

/// A total injective morphism `L → G` together with the revision stamp of
/// the host it was computed on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    morphism: Morphism,
    host_stamp: u64,
}

impl Match {
    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    pub fn host_stamp(&self) -> u64 {
        self.host_stamp
    }

    pub fn node(&self, l: &str) -> Option<&NodeId> {
        self.morphism.nodes.get(l)
    }

    /// Wraps an externally built morphism. Validity is checked when the match
    /// is applied.
    pub fn from_morphism(morphism: Morphism, host: &TypedGraph) -> Self {
        Match {
            morphism,
            host_stamp: host.stamp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchOptions {
    /// Require NAC witnesses `q: N → G` to be injective.
    pub injective_nac_witness: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            injective_nac_witness: true,
        }
    }
}

/// Partial assignment of `L` nodes to host nodes.
pub type PartialAssignment = BTreeMap<NodeId, NodeId>;

/// All NAC-satisfying total injective matches of `rule` in `host` extending
/// `partial`, sorted by their `L`-id to host-id assignment.
pub fn find_matches(
    rule: &Rule,
    host: &TypedGraph,
    partial: Option<&PartialAssignment>,
) -> Result<Vec<Match>, RuleError> {
    find_matches_with(rule, host, partial, MatchOptions::default())
}

pub fn find_matches_with(
    rule: &Rule,
    host: &TypedGraph,
    partial: Option<&PartialAssignment>,
    opts: MatchOptions,
) -> Result<Vec<Match>, RuleError> {
    let lhs = rule.lhs();
    let empty = PartialAssignment::new();
    let partial = partial.unwrap_or(&empty);
    let tg = host.typegraph();
    let mut images = BTreeSet::new();
    for (l, g) in partial {
        let lt = lhs
            .node_type(l.as_str())
            .ok_or_else(|| RuleError::InvalidPartial(format!("`{l}` is not a left-hand side node")))?;
        let gt = host
            .node_type(g.as_str())
            .ok_or_else(|| RuleError::InvalidPartial(format!("`{g}` is not a host node")))?;
        if !tg.conforms(gt, lt) {
            return Err(RuleError::InvalidPartial(format!(
                "`{l}: {lt}` cannot be assigned `{g}: {gt}`"
            )));
        }
        if !images.insert(g) {
            return Err(RuleError::InvalidPartial(format!("`{g}` assigned twice")));
        }
    }
    let mut out: Vec<Match> = Search::new(lhs, host, true, partial.clone(), BTreeMap::new())
        .run(None)
        .into_iter()
        .map(|m| Match {
            morphism: m,
            host_stamp: host.stamp(),
        })
        .filter(|m| {
            rule.nacs()
                .iter()
                .all(|n| nac_allows(n, m, host, opts.injective_nac_witness))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// True if the NAC allows the match: there is no injective `q: N → host`
/// with `q ∘ embedding = match`.
pub fn check_nac(nac: &Nac, m: &Match, host: &TypedGraph) -> bool {
    nac_allows(nac, m, host, true)
}

pub(crate) fn nac_allows(nac: &Nac, m: &Match, host: &TypedGraph, injective: bool) -> bool {
    let fixed_nodes = nac
        .embedding
        .nodes
        .iter()
        .filter_map(|(l, n)| Some((n.clone(), m.morphism.nodes.get(l)?.clone())))
        .collect();
    let fixed_edges = nac
        .embedding
        .edges
        .iter()
        .filter_map(|(l, n)| Some((n.clone(), m.morphism.edges.get(l)?.clone())))
        .collect();
    Search::new(&nac.graph, host, injective, fixed_nodes, fixed_edges)
        .run(Some(1))
        .is_empty()
}

/// Enumerates morphisms from a pattern into a host, honouring fixed node and
/// edge images. Node types may specialise along the morphism; edge types
/// must be equal.
pub(crate) struct Search<'a> {
    pattern: &'a TypedGraph,
    host: &'a TypedGraph,
    injective: bool,
    fixed_nodes: BTreeMap<NodeId, NodeId>,
    fixed_edges: BTreeMap<EdgeId, EdgeId>,
    host_out: BTreeMap<&'a NodeId, Vec<(&'a EdgeId, &'a Edge)>>,
    host_in: BTreeMap<&'a NodeId, Vec<(&'a EdgeId, &'a Edge)>>,
}

impl<'a> Search<'a> {
    pub fn new(
        pattern: &'a TypedGraph,
        host: &'a TypedGraph,
        injective: bool,
        fixed_nodes: BTreeMap<NodeId, NodeId>,
        fixed_edges: BTreeMap<EdgeId, EdgeId>,
    ) -> Self {
        let mut host_out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        let mut host_in: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (id, e) in host.edges() {
            host_out.entry(&e.src).or_default().push((id, e));
            host_in.entry(&e.trg).or_default().push((id, e));
        }
        Search {
            pattern,
            host,
            injective,
            fixed_nodes,
            fixed_edges,
            host_out,
            host_in,
        }
    }

    /// Up to `limit` morphisms, in search order.
    pub fn run(&self, limit: Option<usize>) -> Vec<Morphism> {
        let mut out = Vec::new();
        // fixed images must exist and respect types
        let tg = self.host.typegraph();
        for (p, h) in &self.fixed_nodes {
            match (self.pattern.node_type(p.as_str()), self.host.node_type(h.as_str())) {
                (Some(pt), Some(ht)) if tg.conforms(ht, pt) => {}
                _ => return out,
            }
        }
        if self.injective {
            let imgs: BTreeSet<_> = self.fixed_nodes.values().collect();
            if imgs.len() != self.fixed_nodes.len() {
                return out;
            }
        }
        let order = self.node_order();
        let mut assign = self.fixed_nodes.clone();
        if !self.fixed_nodes.keys().all(|p| self.edges_feasible(p, &assign)) {
            return out;
        }
        let mut used: BTreeSet<NodeId> = if self.injective {
            assign.values().cloned().collect()
        } else {
            BTreeSet::new()
        };
        self.assign_nodes(&order, 0, &mut assign, &mut used, limit, &mut out);
        out
    }

    /// Fixed nodes first, then greedily the node with most edges to already
    /// ordered nodes (ties by id), so candidates come from adjacency lists.
    fn node_order(&self) -> Vec<NodeId> {
        let mut placed: BTreeSet<&NodeId> = self.fixed_nodes.keys().collect();
        let mut order = Vec::new();
        let mut rest: Vec<&NodeId> = self
            .pattern
            .node_ids()
            .filter(|n| !placed.contains(n))
            .collect();
        while !rest.is_empty() {
            let (idx, _) = rest
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let links = self
                        .pattern
                        .edges()
                        .filter(|(_, e)| {
                            (&e.src == *n && placed.contains(&e.trg))
                                || (&e.trg == *n && placed.contains(&e.src))
                        })
                        .count();
                    (i, links)
                })
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .expect("rest is not empty");
            let n = rest.remove(idx);
            placed.insert(n);
            order.push(n.clone());
        }
        order
    }

    fn candidates(&self, p: &NodeId, assign: &BTreeMap<NodeId, NodeId>) -> Vec<&'a NodeId> {
        // an edge to an assigned neighbour narrows candidates to its adjacency
        for (_, e) in self.pattern.edges() {
            if &e.trg == p {
                if let Some(img) = assign.get(&e.src) {
                    let mut v: Vec<&NodeId> = self
                        .host_out
                        .get(img)
                        .into_iter()
                        .flatten()
                        .filter(|(_, he)| he.ty == e.ty)
                        .map(|(_, he)| &he.trg)
                        .collect();
                    v.sort();
                    v.dedup();
                    return v;
                }
            }
            if &e.src == p {
                if let Some(img) = assign.get(&e.trg) {
                    let mut v: Vec<&NodeId> = self
                        .host_in
                        .get(img)
                        .into_iter()
                        .flatten()
                        .filter(|(_, he)| he.ty == e.ty)
                        .map(|(_, he)| &he.src)
                        .collect();
                    v.sort();
                    v.dedup();
                    return v;
                }
            }
        }
        self.host.node_ids().collect()
    }

    fn count_host(&self, s: &NodeId, t: &NodeId, ty: &str) -> usize {
        self.host_out
            .get(s)
            .into_iter()
            .flatten()
            .filter(|(_, e)| &e.trg == t && e.ty == ty)
            .count()
    }

    /// Every pattern edge between `p` and assigned nodes has room in the host.
    fn edges_feasible(&self, p: &NodeId, assign: &BTreeMap<NodeId, NodeId>) -> bool {
        let mut need: BTreeMap<(&NodeId, &NodeId, &str), usize> = BTreeMap::new();
        for (_, e) in self.pattern.edges() {
            if (&e.src == p || &e.trg == p) && assign.contains_key(&e.src) && assign.contains_key(&e.trg) {
                *need.entry((&assign[&e.src], &assign[&e.trg], e.ty.as_str())).or_default() += 1;
            }
        }
        need.into_iter().all(|((s, t, ty), n)| {
            let have = self.count_host(s, t, ty);
            if self.injective {
                have >= n
            } else {
                have >= 1
            }
        })
    }

    fn assign_nodes(
        &self,
        order: &[NodeId],
        i: usize,
        assign: &mut BTreeMap<NodeId, NodeId>,
        used: &mut BTreeSet<NodeId>,
        limit: Option<usize>,
        out: &mut Vec<Morphism>,
    ) {
        if limit.is_some_and(|l| out.len() >= l) {
            return;
        }
        if i == order.len() {
            let edges: Vec<(&EdgeId, &Edge)> = self.pattern.edges().collect();
            let mut emap = BTreeMap::new();
            let mut eused = BTreeSet::new();
            self.assign_edges(&edges, 0, assign, &mut emap, &mut eused, limit, out);
            return;
        }
        let p = &order[i];
        let pt = self.pattern.node_type(p.as_str()).expect("pattern node");
        let tg = self.host.typegraph();
        for c in self.candidates(p, assign) {
            if self.injective && used.contains(c) {
                continue;
            }
            let ct = self.host.node_type(c.as_str()).expect("host node");
            if !tg.conforms(ct, pt) {
                continue;
            }
            assign.insert(p.clone(), c.clone());
            if self.edges_feasible(p, assign) {
                if self.injective {
                    used.insert(c.clone());
                }
                self.assign_nodes(order, i + 1, assign, used, limit, out);
                if self.injective {
                    used.remove(c);
                }
            }
            assign.remove(p);
            if limit.is_some_and(|l| out.len() >= l) {
                return;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_edges(
        &self,
        edges: &[(&EdgeId, &Edge)],
        i: usize,
        nodes: &BTreeMap<NodeId, NodeId>,
        emap: &mut BTreeMap<EdgeId, EdgeId>,
        eused: &mut BTreeSet<EdgeId>,
        limit: Option<usize>,
        out: &mut Vec<Morphism>,
    ) {
        if limit.is_some_and(|l| out.len() >= l) {
            return;
        }
        if i == edges.len() {
            out.push(Morphism {
                nodes: nodes.clone(),
                edges: emap.clone(),
            });
            return;
        }
        let (pid, pe) = edges[i];
        let (s, t) = (&nodes[&pe.src], &nodes[&pe.trg]);
        let fixed = self.fixed_edges.get(pid);
        let cands = self
            .host_out
            .get(s)
            .into_iter()
            .flatten()
            .filter(|(hid, he)| &he.trg == t && he.ty == pe.ty && fixed.is_none_or(|f| f == *hid));
        for (hid, _) in cands {
            if self.injective && eused.contains(*hid) {
                continue;
            }
            emap.insert(pid.clone(), (*hid).clone());
            if self.injective {
                eused.insert((*hid).clone());
            }
            self.assign_edges(edges, i + 1, nodes, emap, eused, limit, out);
            if self.injective {
                eused.remove(*hid);
            }
            emap.remove(pid);
            if limit.is_some_and(|l| out.len() >= l) {
                return;
            }
        }
    }
}
