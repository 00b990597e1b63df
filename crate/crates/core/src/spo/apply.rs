use std::collections::BTreeSet;

use super::{Match, Rule};
use crate::error::RuleError;
use crate::graph::{EdgeId, Morphism, NodeId, TypeCheck, TypedGraph};

/// Node and edge ids, kept apart since they live in separate maps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElementSet {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<EdgeId>,
}

impl ElementSet {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }
}

/// Result graph `H` of one SPO step together with the bookkeeping needed to
/// chain derivations.
#[derive(Clone, Debug)]
pub struct ApplyResult {
    pub result: TypedGraph,
    /// `G ⇀ H`, identity on every surviving element.
    pub comorphism: Morphism,
    pub created: ElementSet,
    pub deleted: ElementSet,
    /// The co-match `R → H`.
    pub rhs_match: Morphism,
}

/// Applies `rule` at `m` in `host` using single-pushout semantics: images of
/// `L ∖ dom(r)` are deleted together with every edge incident to a deleted
/// node, then `R ∖ r(L)` is added with fresh `n#k` / `e#k` ids.
pub fn apply_rule(rule: &Rule, m: &Match, host: &TypedGraph) -> Result<ApplyResult, RuleError> {
    if m.host_stamp() != host.stamp() {
        return Err(RuleError::StaleMatch);
    }
    let mm = m.morphism();
    mm.validate_total_injective(rule.lhs(), host, TypeCheck::Conform)
        .map_err(|e| RuleError::InvalidMatch(e.to_string()))?;

    let mut h = host.clone();
    let mut deleted = ElementSet::default();
    for l in rule.deleted_edges() {
        let img = &mm.edges[l];
        if h.remove_edge(img).is_some() {
            deleted.edges.insert(img.clone());
        }
    }
    for l in rule.deleted_nodes() {
        let img = &mm.nodes[l];
        if let Some(dangling) = h.remove_node(img) {
            deleted.nodes.insert(img.clone());
            deleted.edges.extend(dangling);
        }
    }

    let mut rhs_match = Morphism::new();
    for (l, r) in &rule.mapping().nodes {
        rhs_match.nodes.insert(r.clone(), mm.nodes[l].clone());
    }
    for (l, r) in &rule.mapping().edges {
        rhs_match.edges.insert(r.clone(), mm.edges[l].clone());
    }
    let mut created = ElementSet::default();
    let created_nodes: Vec<NodeId> = rule.created_nodes().cloned().collect();
    for r in created_nodes {
        let id = h.fresh_node_id();
        let ty = rule.rhs().node_type(r.as_str()).expect("rhs node");
        h.add_node(id.clone(), ty)?;
        created.nodes.insert(id.clone());
        rhs_match.nodes.insert(r, id);
    }
    let created_edges: Vec<EdgeId> = rule.created_edges().cloned().collect();
    for r in created_edges {
        let e = rule.rhs().edge(r.as_str()).expect("rhs edge");
        let id = h.fresh_edge_id();
        h.add_edge(
            id.clone(),
            rhs_match.nodes[&e.src].clone(),
            rhs_match.nodes[&e.trg].clone(),
            e.ty.clone(),
        )?;
        created.edges.insert(id.clone());
        rhs_match.edges.insert(r, id);
    }

    let comorphism = Morphism {
        nodes: host
            .node_ids()
            .filter(|n| !deleted.nodes.contains(*n))
            .map(|n| (n.clone(), n.clone()))
            .collect(),
        edges: host
            .edges()
            .map(|(e, _)| e)
            .filter(|e| !deleted.edges.contains(*e))
            .map(|e| (e.clone(), e.clone()))
            .collect(),
    };
    Ok(ApplyResult {
        result: h,
        comorphism,
        created,
        deleted,
        rhs_match,
    })
}
