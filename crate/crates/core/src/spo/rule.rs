use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::RuleError;
use crate::graph::{validate_typing, EdgeId, Morphism, NodeId, TypeCheck, TypeGraph, TypedGraph};

/// Negative application condition: an extension `N` of the left-hand side,
/// given by a total injective embedding `L → N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nac {
    pub graph: TypedGraph,
    pub embedding: Morphism,
}

/// An SPO rule: a partial injective morphism `L ⇀ R` plus NACs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    name: String,
    lhs: TypedGraph,
    rhs: TypedGraph,
    mapping: Morphism,
    nacs: Vec<Nac>,
}

impl Rule {
    pub fn new(
        name: impl Into<String>,
        lhs: TypedGraph,
        rhs: TypedGraph,
        mapping: Morphism,
        nacs: Vec<Nac>,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        let bad = |reason: String| RuleError::InvalidRule {
            rule: name.clone(),
            reason,
        };
        let tg = lhs.typegraph().name();
        for (what, g) in std::iter::once(("rhs", &rhs)).chain(nacs.iter().map(|n| ("nac", &n.graph))) {
            if g.typegraph().name() != tg {
                return Err(bad(format!("{what} is typed over `{}`, lhs over `{tg}`", g.typegraph().name())));
            }
        }
        for (what, g) in [("lhs", &lhs), ("rhs", &rhs)]
            .into_iter()
            .chain(nacs.iter().map(|n| ("nac", &n.graph)))
        {
            if let Some(v) = validate_typing(g, g.typegraph()).violations.first() {
                return Err(bad(format!("{what}: {v}")));
            }
        }
        mapping
            .validate(&lhs, &rhs, TypeCheck::Exact)
            .map_err(|e| bad(format!("mapping: {e}")))?;
        if !mapping.is_injective() {
            return Err(bad("mapping is not injective".into()));
        }
        for (i, nac) in nacs.iter().enumerate() {
            nac.embedding
                .validate_total_injective(&lhs, &nac.graph, TypeCheck::Exact)
                .map_err(|e| bad(format!("nac {i}: {e}")))?;
        }
        Ok(Rule {
            name,
            lhs,
            rhs,
            mapping,
            nacs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lhs(&self) -> &TypedGraph {
        &self.lhs
    }

    pub fn rhs(&self) -> &TypedGraph {
        &self.rhs
    }

    pub fn mapping(&self) -> &Morphism {
        &self.mapping
    }

    pub fn nacs(&self) -> &[Nac] {
        &self.nacs
    }

    pub fn typegraph(&self) -> &Arc<TypeGraph> {
        self.lhs.typegraph()
    }

    /// `L` nodes outside the domain of the mapping.
    pub fn deleted_nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.lhs.node_ids().filter(|n| !self.mapping.nodes.contains_key(*n))
    }

    pub fn deleted_edges(&self) -> impl Iterator<Item = &EdgeId> {
        self.lhs
            .edges()
            .map(|(e, _)| e)
            .filter(|e| !self.mapping.edges.contains_key(*e))
    }

    /// `R` nodes outside the image of the mapping.
    pub fn created_nodes(&self) -> impl Iterator<Item = &NodeId> {
        let image: BTreeSet<&NodeId> = self.mapping.nodes.values().collect();
        self.rhs.node_ids().filter(move |n| !image.contains(n))
    }

    pub fn created_edges(&self) -> impl Iterator<Item = &EdgeId> {
        let image: BTreeSet<&EdgeId> = self.mapping.edges.values().collect();
        self.rhs.edges().map(|(e, _)| e).filter(move |e| !image.contains(e))
    }

    /// Applications never shrink the node count.
    pub fn is_monotone(&self) -> bool {
        self.rhs.node_count() >= self.lhs.node_count()
    }

    /// The same rule with `L` and `R` swapped and no NACs.
    pub fn inverted(&self) -> Rule {
        Rule {
            name: format!("{}^-1", self.name),
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            mapping: self.mapping.inverse().expect("rule mappings are injective"),
            nacs: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    /// In `L` and `R`.
    Keep,
    /// In `L` only.
    Delete,
    /// In `R` only.
    Create,
    /// In the given NAC only.
    Forbid(usize),
}

/// Builds a [`Rule`] from the merged notation used in story patterns:
/// every element carries a [`Mark`], shared ids tie `L`, `R` and the NACs
/// together.
#[derive(Clone, Debug)]
pub struct RuleBuilder {
    name: String,
    tg: Arc<TypeGraph>,
    nodes: Vec<(String, String, Mark)>,
    edges: Vec<(String, String, String, String, Mark)>,
}

impl RuleBuilder {
    pub fn new(name: impl Into<String>, tg: &Arc<TypeGraph>) -> Self {
        RuleBuilder {
            name: name.into(),
            tg: tg.clone(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn node(mut self, id: &str, ty: &str, mark: Mark) -> Self {
        self.nodes.push((id.into(), ty.into(), mark));
        self
    }

    /// Edge with an id derived from its position.
    pub fn edge(self, src: &str, ty: &str, trg: &str, mark: Mark) -> Self {
        let id = format!("{}:{src}-{ty}->{trg}", self.edges.len());
        self.edge_with_id(&id, src, ty, trg, mark)
    }

    pub fn edge_with_id(mut self, id: &str, src: &str, ty: &str, trg: &str, mark: Mark) -> Self {
        self.edges.push((id.into(), src.into(), trg.into(), ty.into(), mark));
        self
    }

    pub fn keep(self, id: &str, ty: &str) -> Self {
        self.node(id, ty, Mark::Keep)
    }

    pub fn delete(self, id: &str, ty: &str) -> Self {
        self.node(id, ty, Mark::Delete)
    }

    pub fn create(self, id: &str, ty: &str) -> Self {
        self.node(id, ty, Mark::Create)
    }

    pub fn forbid(self, nac: usize, id: &str, ty: &str) -> Self {
        self.node(id, ty, Mark::Forbid(nac))
    }

    pub fn build(self) -> Result<Rule, RuleError> {
        let in_l = |m: Mark| matches!(m, Mark::Keep | Mark::Delete);
        let in_r = |m: Mark| matches!(m, Mark::Keep | Mark::Create);
        let mut lhs = TypedGraph::new(self.tg.clone());
        let mut rhs = TypedGraph::new(self.tg.clone());
        let mut mapping = Morphism::new();
        for (id, ty, m) in &self.nodes {
            if in_l(*m) {
                lhs.add_node(id.as_str(), ty.as_str())?;
            }
            if in_r(*m) {
                rhs.add_node(id.as_str(), ty.as_str())?;
            }
            if *m == Mark::Keep {
                mapping.nodes.insert(id.into(), id.into());
            }
        }
        for (id, s, t, ty, m) in &self.edges {
            if in_l(*m) {
                lhs.add_edge(id.as_str(), s.as_str(), t.as_str(), ty.as_str())?;
            }
            if in_r(*m) {
                rhs.add_edge(id.as_str(), s.as_str(), t.as_str(), ty.as_str())?;
            }
            if *m == Mark::Keep {
                mapping.edges.insert(id.into(), id.into());
            }
        }
        let nac_count = self
            .nodes
            .iter()
            .map(|n| n.2)
            .chain(self.edges.iter().map(|e| e.4))
            .filter_map(|m| match m {
                Mark::Forbid(k) => Some(k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut nacs = Vec::with_capacity(nac_count);
        for k in 0..nac_count {
            let mut g = lhs.clone();
            for (id, ty, m) in &self.nodes {
                if *m == Mark::Forbid(k) {
                    g.add_node(id.as_str(), ty.as_str())?;
                }
            }
            for (id, s, t, ty, m) in &self.edges {
                if *m == Mark::Forbid(k) {
                    g.add_edge(id.as_str(), s.as_str(), t.as_str(), ty.as_str())?;
                }
            }
            nacs.push(Nac {
                graph: g,
                embedding: Morphism::identity(&lhs),
            });
        }
        Rule::new(self.name, lhs, rhs, mapping, nacs)
    }
}
