//! The story-diagram document: model type graph, control-flow graph,
//! parameters and one pattern per `CFNode`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{validate_binding_marks, Param, StoryDiagram, StoryPattern, VarDecl};
use crate::error::LoadError;
use crate::graph::{validate_typing, GraphDoc, NodeId, TypeGraphDoc, TypedGraph};
use crate::spo::RuleDoc;
use crate::syntax::{syntax_typegraph, validate_control_flow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDoc {
    pub elem: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDoc {
    pub node: String,
    pub rule: RuleDoc,
    #[serde(default)]
    pub vars: Vec<VarDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramDoc {
    pub typegraph: TypeGraphDoc,
    pub cfg: GraphDoc,
    pub params: Vec<ParamDoc>,
    pub patterns: Vec<PatternDoc>,
}

impl DiagramDoc {
    pub fn from_diagram(d: &StoryDiagram) -> Self {
        DiagramDoc {
            typegraph: TypeGraphDoc::from_typegraph(d.model_typegraph()),
            cfg: GraphDoc::from_graph(d.cfg().graph()),
            params: d
                .params()
                .iter()
                .map(|p| ParamDoc {
                    name: p.name.clone(),
                    ty: p.ty.clone(),
                })
                .collect(),
            patterns: d
                .patterns()
                .iter()
                .map(|(node, pat)| PatternDoc {
                    node: node.to_string(),
                    rule: RuleDoc::from_rule(pat.rule()),
                    vars: pat
                        .var_decls()
                        .into_iter()
                        .filter(|v| v.bound || v.elem != v.name)
                        .map(|v| VarDoc {
                            elem: v.elem,
                            name: v.name,
                            bound: v.bound,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Builds and checks everything except binding marks.
    pub fn build(&self) -> Result<StoryDiagram, LoadError> {
        let tg = Arc::new(self.typegraph.build().map_err(|source| LoadError::Graph {
            context: "model type graph".into(),
            source,
        })?);
        let cfg = self
            .cfg
            .build(&syntax_typegraph())
            .map_err(|source| LoadError::Graph {
                context: "control-flow graph".into(),
                source,
            })?;
        let cfg = validate_control_flow(&cfg).map_err(|e| LoadError::InvalidCfg(e.0))?;
        let mut patterns = BTreeMap::new();
        for p in &self.patterns {
            let rule = p.rule.build(&tg).map_err(|source| LoadError::Rule {
                context: format!("pattern at `{}`", p.node),
                source,
            })?;
            let vars: Vec<VarDecl> = p
                .vars
                .iter()
                .map(|v| VarDecl {
                    elem: v.elem.clone(),
                    name: v.name.clone(),
                    bound: v.bound,
                })
                .collect();
            let pat = StoryPattern::new(rule, &vars)
                .map_err(|m| LoadError::Diagram(format!("pattern at `{}`: {m}", p.node)))?;
            if patterns.insert(NodeId::from(&p.node), pat).is_some() {
                return Err(LoadError::Diagram(format!("two patterns at `{}`", p.node)));
            }
        }
        let params = self
            .params
            .iter()
            .map(|p| Param {
                name: p.name.clone(),
                ty: p.ty.clone(),
            })
            .collect();
        StoryDiagram::new(tg, cfg, params, patterns)
    }
}

/// Parses, validates and checks binding marks.
pub fn load_story_diagram(text: &str) -> Result<StoryDiagram, LoadError> {
    let doc: DiagramDoc = serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    let d = doc.build()?;
    let report = validate_binding_marks(&d);
    if let Some(v) = report.violations.first() {
        return Err(LoadError::Binding(v.to_string()));
    }
    Ok(d)
}

pub fn serialize_story_diagram(d: &StoryDiagram) -> String {
    serde_json::to_string_pretty(&DiagramDoc::from_diagram(d)).expect("diagram documents serialize")
}

/// A model graph over the diagram's type graph, with well-typed edges.
pub fn load_model(text: &str, d: &StoryDiagram) -> Result<TypedGraph, LoadError> {
    let g = crate::graph::parse_graph(text, d.model_typegraph()).map_err(|source| LoadError::Graph {
        context: "model".into(),
        source,
    })?;
    let report = validate_typing(&g, d.model_typegraph());
    if let Some(v) = report.violations.first() {
        return Err(LoadError::Diagram(format!("model is ill-typed: {v}")));
    }
    Ok(g)
}
