use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::semantics::*;
use crate::graph::{GraphDoc, NodeId, TypedGraph};
use crate::model::{StoryDiagram, TemplateId, TemplateKind, VarId};
use crate::syntax::Branch;

/// The interpreter's side of a configuration: a graph over the semantic
/// type graph holding the control flow, its scopes, the scope instances,
/// bindings and the position token, plus the model node each `Variable`
/// stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecState {
    pub(crate) graph: TypedGraph,
    /// `None` once the model node has been deleted.
    pub(crate) values: BTreeMap<NodeId, Option<NodeId>>,
}

/// A binding as seen from its owning instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BindingView {
    pub binding: NodeId,
    pub instance: NodeId,
    pub cf_variable: NodeId,
    pub variable: NodeId,
    pub model_node: Option<NodeId>,
}

pub(crate) fn template_node(id: &str) -> NodeId {
    NodeId::new(format!("tpl:{id}"))
}

pub(crate) fn cf_variable_node(d: &StoryDiagram, v: VarId) -> NodeId {
    NodeId::new(format!("cfv:{}", d.scopes().variable_key(v)))
}

fn scope_type(kind: TemplateKind) -> &'static str {
    match kind {
        TemplateKind::Root => ROOT_SCOPE,
        TemplateKind::JoinBranch => JOIN_BRANCH_SCOPE,
        TemplateKind::SplitBranch => SPLIT_BRANCH_SCOPE,
        TemplateKind::LoopBody => LOOP_BODY_SCOPE,
        TemplateKind::LoopExit => LOOP_EXIT_SCOPE,
    }
}

impl ExecState {
    /// The static part: control flow, scope templates and their variables.
    pub(crate) fn from_diagram(d: &StoryDiagram) -> Self {
        let mut g = TypedGraph::new(semantics_typegraph());
        let cfg = d.cfg().graph();
        let fail = "diagram structures fit the semantic type graph";
        for (n, ty) in cfg.nodes() {
            g.add_node(n.clone(), ty).expect(fail);
        }
        for (id, e) in cfg.edges() {
            g.add_edge(id.clone(), e.src.clone(), e.trg.clone(), &e.ty).expect(fail);
        }
        let scopes = d.scopes();
        let edge = |g: &mut TypedGraph, s: &NodeId, t: &NodeId, ty: &str| {
            let id = format!("{ty}:{s}->{t}");
            g.add_edge(id.as_str(), s.clone(), t.clone(), ty).expect(fail);
        };
        for t in scopes.templates() {
            g.add_node(template_node(&t.id), scope_type(t.kind)).expect(fail);
            for v in &t.declared {
                g.add_node(cf_variable_node(d, *v), CF_VARIABLE).expect(fail);
            }
        }
        for (i, t) in scopes.templates().iter().enumerate() {
            let tn = template_node(&t.id);
            if let Some(p) = t.parent {
                edge(&mut g, &tn, &template_node(&scopes.template(p).id), PARENT);
            }
            for m in &t.members {
                edge(&mut g, &tn, m, CONTAINS);
            }
            for v in &t.declared {
                edge(&mut g, &tn, &cf_variable_node(d, *v), DECLARES);
            }
            for v in scopes.visible(TemplateId(i)) {
                edge(&mut g, &tn, &cf_variable_node(d, v), VISIBLE);
            }
            if let Some((cond, b)) = &t.origin {
                let ty = match b {
                    Branch::Success => SUCCESS_SCOPE,
                    Branch::Failure => FAILURE_SCOPE,
                };
                edge(&mut g, cond, &tn, ty);
            }
        }
        ExecState {
            graph: g,
            values: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &TypedGraph {
        &self.graph
    }

    /// Model node a `Variable` proxies; `None` if it was deleted.
    pub fn value(&self, variable: &str) -> Option<&NodeId> {
        self.values.get(variable).and_then(Option::as_ref)
    }

    pub fn token(&self) -> Option<&NodeId> {
        self.graph.nodes_of_type(POSITION_TOKEN).next()
    }

    pub fn token_count(&self) -> usize {
        self.graph.nodes_of_type(POSITION_TOKEN).count()
    }

    /// The control-flow node the token is attached to.
    pub fn token_node(&self) -> Option<&NodeId> {
        let t = self.token()?;
        self.graph.successors(t.as_str(), AT).next()
    }

    /// The scope instance the token executes in.
    pub fn current_instance(&self) -> Option<&NodeId> {
        let t = self.token()?;
        self.graph.successors(t.as_str(), SCOPE_REF).next()
    }

    pub fn instances(&self) -> impl Iterator<Item = &NodeId> {
        self.graph.nodes_of_type(SCOPE_INSTANCE)
    }

    pub fn instance_template<'a>(&'a self, i: &'a str) -> Option<&'a NodeId> {
        self.graph.successors(i, INSTANCE_OF).next()
    }

    pub fn parent_instance<'a>(&'a self, i: &'a str) -> Option<&'a NodeId> {
        self.graph.successors(i, PARENT_INSTANCE).next()
    }

    /// The current instance followed by its ancestors.
    pub fn active_chain(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.current_instance().cloned();
        while let Some(i) = cur {
            cur = self.parent_instance(i.as_str()).cloned();
            out.push(i);
        }
        out
    }

    pub fn bindings(&self) -> Vec<BindingView> {
        self.graph
            .nodes_of_type(VARIABLE_BINDING)
            .filter_map(|b| self.binding_view(b))
            .collect()
    }

    pub fn bindings_of(&self, instance: &str) -> Vec<BindingView> {
        self.graph
            .in_edges(instance)
            .filter(|(_, e)| e.ty == OWNER)
            .filter_map(|(_, e)| self.binding_view(&e.src))
            .collect()
    }

    fn binding_view(&self, b: &NodeId) -> Option<BindingView> {
        let one = |ty: &str| self.graph.successors(b.as_str(), ty).next().cloned();
        let variable = one(VALUE)?;
        Some(BindingView {
            binding: b.clone(),
            instance: one(OWNER)?,
            cf_variable: one(CF_VARIABLE_REF)?,
            model_node: self.value(variable.as_str()).cloned(),
            variable,
        })
    }

    /// A live proxy for `model_node`, if one exists.
    pub(crate) fn variable_for(&self, model_node: &NodeId) -> Option<&NodeId> {
        self.values
            .iter()
            .find(|(_, v)| v.as_ref() == Some(model_node))
            .map(|(k, _)| k)
    }

    pub fn to_doc(&self) -> StateDoc {
        StateDoc {
            graph: GraphDoc::from_graph(&self.graph),
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.to_string(), v.as_ref().map(ToString::to_string)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("states serialize")
    }
}

/// Serialized form of an [`ExecState`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub graph: GraphDoc,
    /// `Variable` id to model node id, `null` once deleted.
    pub values: BTreeMap<String, Option<String>>,
}
