use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{
    syntax_rules, Branch, Derivation, SyntaxRuleKind, ValidatedCfg, CF_NODE, NEXT, STOP_NODE,
};
use crate::graph::{NodeId, TypedGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum NodeClass {
    Sequential,
    ConditionalJoining {
        join: NodeId,
    },
    ConditionalNonjoining {
        success_stops: Vec<NodeId>,
        failure_stops: Vec<NodeId>,
    },
    LoopHead {
        body: Branch,
    },
}

impl NodeClass {
    pub fn is_conditional(&self) -> bool {
        !matches!(self, NodeClass::Sequential)
    }
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeClass::Sequential => f.write_str("sequential"),
            NodeClass::ConditionalJoining { join } => write!(f, "conditional-joining (join {join})"),
            NodeClass::ConditionalNonjoining { .. } => f.write_str("conditional-nonjoining"),
            NodeClass::LoopHead { body } => write!(f, "loop-head-{body}"),
        }
    }
}

/// The class of every `CFNode` of a valid control-flow graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct NodeClassification {
    classes: BTreeMap<NodeId, NodeClass>,
}

impl NodeClassification {
    pub fn get(&self, node: &str) -> Option<&NodeClass> {
        self.classes.get(node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &NodeClass)> {
        self.classes.iter()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Classes come with the validation witness; this accessor exists so call
/// sites read like the other checks.
pub fn classify_nodes(cfg: &ValidatedCfg) -> &NodeClassification {
    cfg.classification()
}

/// A node with an outgoing `next` is sequential. Conditionals take their
/// class from the rule that inserted them, which fixes their branch edges
/// for the rest of the derivation.
pub(super) fn classify(g: &TypedGraph, d: &Derivation) -> NodeClassification {
    let kinds: BTreeMap<String, SyntaxRuleKind> = syntax_rules()
        .into_iter()
        .map(|r| (r.rule.name().to_owned(), r.kind))
        .collect();
    let mut origin: BTreeMap<&NodeId, (SyntaxRuleKind, &BTreeMap<String, NodeId>)> = BTreeMap::new();
    for step in &d.steps {
        let kind = kinds[&step.rule];
        origin.insert(&step.nodes["c"], (kind, &step.nodes));
    }
    let mut classes = BTreeMap::new();
    for n in g.nodes_of_type(CF_NODE) {
        if g.successors(n.as_str(), NEXT).next().is_some() {
            classes.insert(n.clone(), NodeClass::Sequential);
            continue;
        }
        let (kind, roles) = origin[n];
        let class = match kind {
            SyntaxRuleKind::JoiningConditional => NodeClass::ConditionalJoining {
                join: roles["b"].clone(),
            },
            SyntaxRuleKind::NonJoining { .. } => {
                let stops = |b: Branch| {
                    let t = g
                        .successors(n.as_str(), b.edge_type())
                        .next()
                        .expect("conditionals have both branches");
                    reachable_stops(g, t)
                };
                NodeClass::ConditionalNonjoining {
                    success_stops: stops(Branch::Success),
                    failure_stops: stops(Branch::Failure),
                }
            }
            SyntaxRuleKind::Loop { body, .. } => NodeClass::LoopHead { body },
            SyntaxRuleKind::Sequential => unreachable!("sequential nodes keep their next edge"),
        };
        classes.insert(n.clone(), class);
    }
    NodeClassification { classes }
}

fn reachable_stops(g: &TypedGraph, from: &NodeId) -> Vec<NodeId> {
    let mut seen = BTreeSet::from([from.clone()]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(n) = queue.pop_front() {
        for (_, e) in g.out_edges(n.as_str()) {
            if seen.insert(e.trg.clone()) {
                queue.push_back(e.trg.clone());
            }
        }
    }
    seen.into_iter()
        .filter(|n| g.node_type(n.as_str()) == Some(STOP_NODE))
        .collect()
}
