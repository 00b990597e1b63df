//! JSON documents for graphs and type graphs.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{TypeGraph, TypedGraph};
use crate::error::GraphError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub src: String,
    pub trg: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub typegraph: String,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

/// `parent` accepts a string; a list is parsed only to reject it with a
/// precise error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParentDoc {
    One(String),
    Many(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTypeDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<ParentDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTypeDoc {
    pub name: String,
    pub src: String,
    pub trg: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeGraphDoc {
    pub name: String,
    pub node_types: Vec<NodeTypeDoc>,
    pub edge_types: Vec<EdgeTypeDoc>,
}

impl TypeGraphDoc {
    pub fn from_typegraph(tg: &TypeGraph) -> Self {
        TypeGraphDoc {
            name: tg.name().to_owned(),
            node_types: tg
                .node_types()
                .map(|(n, p)| NodeTypeDoc {
                    name: n.to_owned(),
                    parent: p.map(|p| ParentDoc::One(p.to_owned())),
                })
                .collect(),
            edge_types: tg
                .edge_types()
                .map(|e| EdgeTypeDoc {
                    name: e.name.clone(),
                    src: e.src.clone(),
                    trg: e.trg.clone(),
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<TypeGraph, GraphError> {
        let mut nodes = Vec::with_capacity(self.node_types.len());
        for nt in &self.node_types {
            let parent = match &nt.parent {
                None => None,
                Some(ParentDoc::One(p)) => Some(p.as_str()),
                Some(ParentDoc::Many(ps)) => match ps.as_slice() {
                    [] => None,
                    [p] => Some(p.as_str()),
                    _ => return Err(GraphError::MultipleInheritance(nt.name.clone())),
                },
            };
            nodes.push((nt.name.as_str(), parent));
        }
        TypeGraph::new(
            self.name.clone(),
            nodes,
            self.edge_types
                .iter()
                .map(|e| (e.name.as_str(), e.src.as_str(), e.trg.as_str())),
        )
    }
}

impl GraphDoc {
    pub fn from_graph(g: &TypedGraph) -> Self {
        GraphDoc {
            typegraph: g.typegraph().name().to_owned(),
            nodes: g
                .nodes()
                .map(|(id, ty)| NodeDoc {
                    id: id.to_string(),
                    ty: ty.to_owned(),
                })
                .collect(),
            edges: g
                .edges()
                .map(|(id, e)| EdgeDoc {
                    id: id.to_string(),
                    ty: e.ty.clone(),
                    src: e.src.to_string(),
                    trg: e.trg.to_string(),
                })
                .collect(),
        }
    }

    /// Builds the graph over `tg`, rejecting a different type graph name,
    /// unknown type names, duplicate ids and dangling edge references.
    pub fn build(&self, tg: &Arc<TypeGraph>) -> Result<TypedGraph, GraphError> {
        if self.typegraph != tg.name() {
            return Err(GraphError::TypeGraphMismatch {
                expected: tg.name().to_owned(),
                found: self.typegraph.clone(),
            });
        }
        let mut seen = BTreeSet::new();
        for id in self.nodes.iter().map(|n| &n.id).chain(self.edges.iter().map(|e| &e.id)) {
            if !seen.insert(id) {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }
        let mut g = TypedGraph::new(tg.clone());
        for n in &self.nodes {
            if !tg.has_node_type(&n.ty) {
                return Err(GraphError::UnknownNodeType(n.ty.clone()));
            }
            g.add_node(n.id.as_str(), n.ty.as_str())?;
        }
        for e in &self.edges {
            if tg.edge_type(&e.ty).is_none() {
                return Err(GraphError::UnknownEdgeType(e.ty.clone()));
            }
            g.add_edge(e.id.as_str(), e.src.as_str(), e.trg.as_str(), e.ty.as_str())?;
        }
        Ok(g)
    }
}

/// Pretty-printed JSON, nodes and edges in id order.
pub fn serialize_graph(g: &TypedGraph) -> String {
    serde_json::to_string_pretty(&GraphDoc::from_graph(g)).expect("graph documents serialize")
}

pub fn parse_graph(text: &str, tg: &Arc<TypeGraph>) -> Result<TypedGraph, GraphError> {
    let doc: GraphDoc =
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    doc.build(tg)
}

pub fn serialize_typegraph(tg: &TypeGraph) -> String {
    serde_json::to_string_pretty(&TypeGraphDoc::from_typegraph(tg))
        .expect("type graph documents serialize")
}

pub fn parse_typegraph(text: &str) -> Result<TypeGraph, GraphError> {
    let doc: TypeGraphDoc =
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    doc.build()
}
