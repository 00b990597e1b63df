use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{EdgeId, NodeId, TypedGraph};

/// How node types must relate along a morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeCheck {
    /// Image type equals source type.
    Exact,
    /// Image type equals or inherits from the source type. Used for matches,
    /// where pattern nodes may carry an abstract parent type.
    Conform,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("node `{0}` is not in the source graph")]
    UnknownSource(String),
    #[error("`{0}` is not in the target graph")]
    UnknownTarget(String),
    #[error("edge `{0}` is mapped but one of its endpoints is not")]
    DomainNotSubgraph(String),
    #[error("edge `{0}` is mapped inconsistently with its endpoints")]
    NotStructurePreserving(String),
    #[error("`{0}` changes type")]
    NotTypePreserving(String),
    #[error("`{0}` shares its image with another element")]
    NotInjective(String),
    #[error("`{0}` is not mapped")]
    NotTotal(String),
}

/// A (possibly partial) graph morphism: a pair of maps on node and edge ids.
/// The domain is the set of keys.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub nodes: BTreeMap<NodeId, NodeId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
}

impl Morphism {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(g: &TypedGraph) -> Self {
        Morphism {
            nodes: g.node_ids().map(|n| (n.clone(), n.clone())).collect(),
            edges: g.edges().map(|(e, _)| (e.clone(), e.clone())).collect(),
        }
    }

    pub fn node(&self, n: &str) -> Option<&NodeId> {
        self.nodes.get(n)
    }

    pub fn edge(&self, e: &str) -> Option<&EdgeId> {
        self.edges.get(e)
    }

    pub fn is_injective(&self) -> bool {
        let n: BTreeSet<_> = self.nodes.values().collect();
        let e: BTreeSet<_> = self.edges.values().collect();
        n.len() == self.nodes.len() && e.len() == self.edges.len()
    }

    pub fn is_total_on(&self, g: &TypedGraph) -> bool {
        g.node_ids().all(|n| self.nodes.contains_key(n))
            && g.edges().all(|(e, _)| self.edges.contains_key(e))
    }

    /// `other ∘ self`, defined where both are.
    pub fn then(&self, other: &Morphism) -> Morphism {
        Morphism {
            nodes: self
                .nodes
                .iter()
                .filter_map(|(k, v)| Some((k.clone(), other.nodes.get(v)?.clone())))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter_map(|(k, v)| Some((k.clone(), other.edges.get(v)?.clone())))
                .collect(),
        }
    }

    /// Inverse of an injective morphism.
    pub fn inverse(&self) -> Option<Morphism> {
        if !self.is_injective() {
            return None;
        }
        Some(Morphism {
            nodes: self.nodes.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
            edges: self.edges.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
        })
    }

    /// Checks that this is a well-formed partial morphism `from ⇀ to`: the
    /// domain is a subgraph, edges map consistently with their endpoints and
    /// typing is preserved according to `check`.
    pub fn validate(
        &self,
        from: &TypedGraph,
        to: &TypedGraph,
        check: TypeCheck,
    ) -> Result<(), MorphismError> {
        let tg = to.typegraph();
        for (n, img) in &self.nodes {
            let ty = from
                .node_type(n.as_str())
                .ok_or_else(|| MorphismError::UnknownSource(n.to_string()))?;
            let img_ty = to
                .node_type(img.as_str())
                .ok_or_else(|| MorphismError::UnknownTarget(img.to_string()))?;
            let ok = match check {
                TypeCheck::Exact => ty == img_ty,
                TypeCheck::Conform => tg.conforms(img_ty, ty),
            };
            if !ok {
                return Err(MorphismError::NotTypePreserving(n.to_string()));
            }
        }
        for (e, img) in &self.edges {
            let edge = from
                .edge(e.as_str())
                .ok_or_else(|| MorphismError::UnknownSource(e.to_string()))?;
            let img_edge = to
                .edge(img.as_str())
                .ok_or_else(|| MorphismError::UnknownTarget(img.to_string()))?;
            let (Some(s), Some(t)) = (self.nodes.get(&edge.src), self.nodes.get(&edge.trg)) else {
                return Err(MorphismError::DomainNotSubgraph(e.to_string()));
            };
            if s != &img_edge.src || t != &img_edge.trg {
                return Err(MorphismError::NotStructurePreserving(e.to_string()));
            }
            if edge.ty != img_edge.ty {
                return Err(MorphismError::NotTypePreserving(e.to_string()));
            }
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus totality and injectivity.
    pub fn validate_total_injective(
        &self,
        from: &TypedGraph,
        to: &TypedGraph,
        check: TypeCheck,
    ) -> Result<(), MorphismError> {
        self.validate(from, to, check)?;
        if let Some(n) = from.node_ids().find(|n| !self.nodes.contains_key(*n)) {
            return Err(MorphismError::NotTotal(n.to_string()));
        }
        if let Some((e, _)) = from.edges().find(|(e, _)| !self.edges.contains_key(*e)) {
            return Err(MorphismError::NotTotal(e.to_string()));
        }
        let mut seen = BTreeSet::new();
        for (k, v) in &self.nodes {
            if !seen.insert(v) {
                return Err(MorphismError::NotInjective(k.to_string()));
            }
        }
        let mut seen = BTreeSet::new();
        for (k, v) in &self.edges {
            if !seen.insert(v) {
                return Err(MorphismError::NotInjective(k.to_string()));
            }
        }
        Ok(())
    }
}
