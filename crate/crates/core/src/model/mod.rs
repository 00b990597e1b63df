//! Story diagrams: a validated control-flow graph with a story pattern on
//! every `CFNode`, plus the static scope structure derived from it.

mod binding;
mod io;
mod pattern;
mod scopes;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use binding::{validate_binding_marks, BindingReport, BindingViolation};
pub use io::{
    load_model, load_story_diagram, serialize_story_diagram, DiagramDoc, ParamDoc, PatternDoc,
    VarDoc,
};
pub use pattern::{StoryPattern, VarDecl};
pub use scopes::{analyze_scopes, CfVariable, ScopeTemplate, ScopeTree, TemplateId, TemplateKind, VarId};

use crate::error::LoadError;
use crate::graph::{NodeId, TypeGraph};
use crate::syntax::{ValidatedCfg, CF_NODE};

/// A diagram parameter, bound by the caller before the first step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug)]
pub struct StoryDiagram {
    model_tg: Arc<TypeGraph>,
    cfg: ValidatedCfg,
    params: Vec<Param>,
    patterns: BTreeMap<NodeId, StoryPattern>,
    scopes: ScopeTree,
}

impl StoryDiagram {
    /// Binding marks are not checked here; see [`validate_binding_marks`].
    pub fn new(
        model_tg: Arc<TypeGraph>,
        cfg: ValidatedCfg,
        params: Vec<Param>,
        patterns: BTreeMap<NodeId, StoryPattern>,
    ) -> Result<Self, LoadError> {
        let bad = |m: String| Err(LoadError::Diagram(m));
        if params.len() != 1 {
            return bad(format!("expected exactly one parameter, found {}", params.len()));
        }
        for p in &params {
            if !model_tg.has_node_type(&p.ty) {
                return bad(format!("parameter `{}` has unknown type `{}`", p.name, p.ty));
            }
        }
        let g = cfg.graph();
        for n in g.nodes_of_type(CF_NODE) {
            if !patterns.contains_key(n) {
                return bad(format!("node `{n}` has no pattern"));
            }
        }
        for (n, pat) in &patterns {
            if g.node_type(n.as_str()) != Some(CF_NODE) {
                return bad(format!("pattern attached to `{n}`, which is not a CFNode"));
            }
            if pat.rule().typegraph().name() != model_tg.name() {
                return bad(format!(
                    "pattern at `{n}` is typed over `{}`, not `{}`",
                    pat.rule().typegraph().name(),
                    model_tg.name()
                ));
            }
        }
        let scopes = analyze_scopes(&cfg, &patterns, &params).map_err(LoadError::Diagram)?;
        Ok(StoryDiagram {
            model_tg,
            cfg,
            params,
            patterns,
            scopes,
        })
    }

    pub fn model_typegraph(&self) -> &Arc<TypeGraph> {
        &self.model_tg
    }

    pub fn cfg(&self) -> &ValidatedCfg {
        &self.cfg
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn patterns(&self) -> &BTreeMap<NodeId, StoryPattern> {
        &self.patterns
    }

    pub fn pattern(&self, node: &str) -> Option<&StoryPattern> {
        self.patterns.get(node)
    }

    pub fn scopes(&self) -> &ScopeTree {
        &self.scopes
    }
}
