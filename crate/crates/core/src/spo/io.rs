//! JSON documents for rules.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Nac, Rule};
use crate::error::{GraphError, RuleError};
use crate::graph::{GraphDoc, Morphism, TypeGraph, TypedGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDoc {
    pub l: String,
    pub r: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedDoc {
    pub l: String,
    pub n: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NacDoc {
    pub graph: GraphDoc,
    pub embed: Vec<EmbedDoc>,
}

/// `map` and `embed` list node and edge pairs alike; ids are unique across
/// nodes and edges of a graph, so each pair is unambiguous.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub name: String,
    /// Marks a rule whose shape is a reconstruction rather than a fixed
    /// definition.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub provisional: bool,
    pub lhs: GraphDoc,
    pub rhs: GraphDoc,
    pub map: Vec<MapDoc>,
    #[serde(default)]
    pub nacs: Vec<NacDoc>,
}

impl RuleDoc {
    pub fn from_rule(rule: &Rule) -> Self {
        let pairs = |m: &Morphism| -> Vec<(String, String)> {
            m.nodes
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .chain(m.edges.iter().map(|(a, b)| (a.to_string(), b.to_string())))
                .collect()
        };
        RuleDoc {
            name: rule.name().to_owned(),
            provisional: false,
            lhs: GraphDoc::from_graph(rule.lhs()),
            rhs: GraphDoc::from_graph(rule.rhs()),
            map: pairs(rule.mapping())
                .into_iter()
                .map(|(l, r)| MapDoc { l, r })
                .collect(),
            nacs: rule
                .nacs()
                .iter()
                .map(|nac| NacDoc {
                    graph: GraphDoc::from_graph(&nac.graph),
                    embed: pairs(&nac.embedding)
                        .into_iter()
                        .map(|(l, n)| EmbedDoc { l, n })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn build(&self, tg: &Arc<TypeGraph>) -> Result<Rule, RuleError> {
        let lhs = self.lhs.build(tg)?;
        let rhs = self.rhs.build(tg)?;
        let mapping = pairs_to_morphism(&lhs, self.map.iter().map(|p| (&p.l, &p.r)))?;
        let mut nacs = Vec::with_capacity(self.nacs.len());
        for nac in &self.nacs {
            let graph = nac.graph.build(tg)?;
            let embedding = pairs_to_morphism(&lhs, nac.embed.iter().map(|p| (&p.l, &p.n)))?;
            nacs.push(Nac { graph, embedding });
        }
        Rule::new(self.name.clone(), lhs, rhs, mapping, nacs)
    }
}

fn pairs_to_morphism<'a>(
    from: &TypedGraph,
    pairs: impl Iterator<Item = (&'a String, &'a String)>,
) -> Result<Morphism, RuleError> {
    let mut m = Morphism::new();
    for (a, b) in pairs {
        let fresh = if from.has_node(a) {
            m.nodes.insert(a.into(), b.into()).is_none()
        } else if from.has_edge(a) {
            m.edges.insert(a.into(), b.into()).is_none()
        } else {
            return Err(GraphError::Malformed(format!("mapping source `{a}` is not in the left-hand side")).into());
        };
        if !fresh {
            return Err(GraphError::Malformed(format!("`{a}` mapped twice")).into());
        }
    }
    Ok(m)
}

pub fn serialize_rule(rule: &Rule) -> String {
    serde_json::to_string_pretty(&RuleDoc::from_rule(rule)).expect("rule documents serialize")
}

pub fn parse_rule(text: &str, tg: &Arc<TypeGraph>) -> Result<Rule, RuleError> {
    let doc: RuleDoc = serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    doc.build(tg)
}
