//! Typed directed multigraphs, their type graphs and morphisms between them.
//!
//! Graphs are plain values: every mutating method stamps the graph with a new
//! revision so that stale matches can be detected by the rewriting engine.

mod canon;
mod io;
mod iso;
mod morphism;
mod typing;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use canon::{canonical_form, invariant_hash, CanonicalCode, CanonicalForm};
pub use io::{
    parse_graph, parse_typegraph, serialize_graph, serialize_typegraph, EdgeDoc, EdgeTypeDoc,
    GraphDoc, NodeDoc, NodeTypeDoc, ParentDoc, TypeGraphDoc,
};
pub use iso::{are_isomorphic, find_isomorphism};
pub use morphism::{Morphism, MorphismError, TypeCheck};
pub use typing::{validate_typing, TypingReport, Violation, ViolationKind};

use crate::error::GraphError;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl From<&String> for $name {
            fn from(s: &String) -> Self {
                Self(s.clone())
            }
        }

        impl From<&$name> for $name {
            fn from(s: &$name) -> Self {
                s.clone()
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(
    /// Opaque node identifier, unique within one graph.
    NodeId
);
id_type!(
    /// Opaque edge identifier, unique within one graph.
    EdgeId
);

/// A declared edge type with the node types allowed at its ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeType {
    pub name: String,
    pub src: String,
    pub trg: String,
}

/// Node and edge types plus a single-inheritance relation on node types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeGraph {
    name: String,
    node_types: BTreeMap<String, Option<String>>,
    edge_types: BTreeMap<String, EdgeType>,
}

impl TypeGraph {
    /// Builds a type graph, rejecting unknown parents, inheritance cycles and
    /// edge types whose endpoints are not declared node types.
    pub fn new<'a>(
        name: impl Into<String>,
        node_types: impl IntoIterator<Item = (&'a str, Option<&'a str>)>,
        edge_types: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    ) -> Result<Self, GraphError> {
        let mut nodes = BTreeMap::new();
        for (n, p) in node_types {
            if nodes.insert(n.to_owned(), p.map(str::to_owned)).is_some() {
                return Err(GraphError::DuplicateType(n.to_owned()));
            }
        }
        let mut edges = BTreeMap::new();
        for (n, s, t) in edge_types {
            let et = EdgeType {
                name: n.to_owned(),
                src: s.to_owned(),
                trg: t.to_owned(),
            };
            if edges.insert(n.to_owned(), et).is_some() {
                return Err(GraphError::DuplicateType(n.to_owned()));
            }
        }
        let tg = TypeGraph {
            name: name.into(),
            node_types: nodes,
            edge_types: edges,
        };
        tg.check()?;
        Ok(tg)
    }

    fn check(&self) -> Result<(), GraphError> {
        for (n, p) in &self.node_types {
            if let Some(p) = p {
                if !self.node_types.contains_key(p) {
                    return Err(GraphError::UnknownNodeType(p.clone()));
                }
            }
            // walk up; more steps than types means a cycle
            let mut cur = p.as_deref();
            let mut steps = 0;
            while let Some(c) = cur {
                steps += 1;
                if c == n || steps > self.node_types.len() {
                    return Err(GraphError::InheritanceCycle(n.clone()));
                }
                cur = self.node_types.get(c).and_then(|p| p.as_deref());
            }
        }
        for et in self.edge_types.values() {
            for end in [&et.src, &et.trg] {
                if !self.node_types.contains_key(end) {
                    return Err(GraphError::UnknownNodeType(end.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_types(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.node_types
            .iter()
            .map(|(n, p)| (n.as_str(), p.as_deref()))
    }

    pub fn edge_types(&self) -> impl Iterator<Item = &EdgeType> {
        self.edge_types.values()
    }

    pub fn has_node_type(&self, name: &str) -> bool {
        self.node_types.contains_key(name)
    }

    pub fn edge_type(&self, name: &str) -> Option<&EdgeType> {
        self.edge_types.get(name)
    }

    pub fn parent(&self, name: &str) -> Option<&str> {
        self.node_types.get(name).and_then(|p| p.as_deref())
    }

    /// True if `sub` equals `sup` or transitively inherits from it.
    pub fn conforms(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub);
        while let Some(c) = cur {
            if c == sup {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }
}

/// Endpoints and type of one edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub trg: NodeId,
    pub ty: String,
}

static NEXT_STAMP: AtomicU64 = AtomicU64::new(1);

fn next_stamp() -> u64 {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

/// A directed multigraph whose nodes and edges carry type names from a
/// [`TypeGraph`].
///
/// Structural soundness (unique ids, no dangling edges) is enforced by the
/// mutators. Typing is not: use [`validate_typing`] to check it.
#[derive(Clone, Debug)]
pub struct TypedGraph {
    tg: Arc<TypeGraph>,
    nodes: BTreeMap<NodeId, String>,
    edges: BTreeMap<EdgeId, Edge>,
    stamp: u64,
}

impl PartialEq for TypedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.tg.name == other.tg.name && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for TypedGraph {}

impl TypedGraph {
    pub fn new(tg: Arc<TypeGraph>) -> Self {
        TypedGraph {
            tg,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            stamp: next_stamp(),
        }
    }

    pub fn typegraph(&self) -> &Arc<TypeGraph> {
        &self.tg
    }

    /// Revision stamp; changes on every mutation, survives cloning.
    pub fn stamp(&self) -> u64 {
        self.stamp
    }

    fn touch(&mut self) {
        self.stamp = next_stamp();
    }

    fn id_taken(&self, id: &str) -> bool {
        self.nodes.contains_key(id) || self.edges.contains_key(id)
    }

    pub fn add_node(
        &mut self,
        id: impl Into<NodeId>,
        ty: impl Into<String>,
    ) -> Result<&mut Self, GraphError> {
        let id = id.into();
        if self.id_taken(id.as_str()) {
            return Err(GraphError::DuplicateId(id.0));
        }
        self.nodes.insert(id, ty.into());
        self.touch();
        Ok(self)
    }

    pub fn add_edge(
        &mut self,
        id: impl Into<EdgeId>,
        src: impl Into<NodeId>,
        trg: impl Into<NodeId>,
        ty: impl Into<String>,
    ) -> Result<&mut Self, GraphError> {
        let id = id.into();
        let (src, trg) = (src.into(), trg.into());
        if self.id_taken(id.as_str()) {
            return Err(GraphError::DuplicateId(id.0));
        }
        for end in [&src, &trg] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::DanglingEdge {
                    edge: id.0,
                    node: end.0.clone(),
                });
            }
        }
        self.edges.insert(
            id,
            Edge {
                src,
                trg,
                ty: ty.into(),
            },
        );
        self.touch();
        Ok(self)
    }

    /// Removes a node together with all incident edges; returns the removed
    /// edge ids.
    pub fn remove_node(&mut self, id: &NodeId) -> Option<Vec<EdgeId>> {
        self.nodes.remove(id)?;
        let incident: Vec<EdgeId> = self
            .edges
            .iter()
            .filter(|(_, e)| &e.src == id || &e.trg == id)
            .map(|(k, _)| k.clone())
            .collect();
        for e in &incident {
            self.edges.remove(e);
        }
        self.touch();
        Some(incident)
    }

    pub fn remove_edge(&mut self, id: &EdgeId) -> Option<Edge> {
        let e = self.edges.remove(id)?;
        self.touch();
        Some(e)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &str)> {
        self.nodes.iter().map(|(k, v)| (k, v.as_str()))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &Edge)> {
        self.edges.iter()
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn has_edge(&self, id: &str) -> bool {
        self.edges.contains_key(id)
    }

    pub fn node_type(&self, id: &str) -> Option<&str> {
        self.nodes.get(id).map(String::as_str)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn out_edges<'a>(&'a self, node: &'a str) -> impl Iterator<Item = (&'a EdgeId, &'a Edge)> {
        self.edges.iter().filter(move |(_, e)| e.src.as_str() == node)
    }

    pub fn in_edges<'a>(&'a self, node: &'a str) -> impl Iterator<Item = (&'a EdgeId, &'a Edge)> {
        self.edges.iter().filter(move |(_, e)| e.trg.as_str() == node)
    }

    /// Targets of outgoing edges of type `ty`.
    pub fn successors<'a>(&'a self, node: &'a str, ty: &'a str) -> impl Iterator<Item = &'a NodeId> {
        self.out_edges(node)
            .filter(move |(_, e)| e.ty == ty)
            .map(|(_, e)| &e.trg)
    }

    pub fn nodes_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a NodeId> {
        self.nodes
            .iter()
            .filter(move |(_, t)| t.as_str() == ty)
            .map(|(k, _)| k)
    }

    /// Next unused `n#k` node id; `k` continues after the largest suffix seen
    /// so far, which keeps fresh ids reproducible along a derivation.
    pub fn fresh_node_id(&self) -> NodeId {
        NodeId(format!("n#{}", self.max_suffix("n#") + 1))
    }

    /// Next unused `e#k` edge id.
    pub fn fresh_edge_id(&self) -> EdgeId {
        EdgeId(format!("e#{}", self.max_suffix("e#") + 1))
    }

    fn max_suffix(&self, prefix: &str) -> u64 {
        self.nodes
            .keys()
            .map(|k| k.as_str())
            .chain(self.edges.keys().map(|k| k.as_str()))
            .filter_map(|id| id.strip_prefix(prefix)?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
    }

    /// Copy of the node/edge ids, handy for set comparisons in tests.
    pub fn element_ids(&self) -> (BTreeSet<NodeId>, BTreeSet<EdgeId>) {
        (
            self.nodes.keys().cloned().collect(),
            self.edges.keys().cloned().collect(),
        )
    }

    /// Rebinds the graph to another type graph with the same name.
    pub fn with_typegraph(mut self, tg: Arc<TypeGraph>) -> Self {
        self.tg = tg;
        self
    }
}
