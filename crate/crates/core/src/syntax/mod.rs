//! The control-flow syntax: its type graph, the start graph, the sixteen
//! insertion rules, membership checking by backward reduction, and the
//! structural class of every control-flow node.

mod classify;
mod rules;
mod validate;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::graph::{TypeGraph, TypedGraph};

pub use classify::{classify_nodes, NodeClass, NodeClassification};
pub use rules::{syntax_grammar, syntax_rules, RuleCategory, SyntaxRule, SyntaxRuleKind};
pub use validate::{validate_control_flow, Derivation, DerivationStep, ValidatedCfg};

pub const SYNTAX_TYPEGRAPH: &str = "Syntax";
pub const ABSTRACT_NODE: &str = "AbstractNode";
pub const CF_NODE: &str = "CFNode";
pub const START_NODE: &str = "StartNode";
pub const STOP_NODE: &str = "StopNode";
pub const NEXT: &str = "next";
pub const SUCCESS: &str = "success";
pub const FAILURE: &str = "failure";

/// Which way a conditional left: along `success` or along `failure`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Success,
    Failure,
}

impl Branch {
    pub fn edge_type(self) -> &'static str {
        match self {
            Branch::Success => SUCCESS,
            Branch::Failure => FAILURE,
        }
    }

    pub fn other(self) -> Branch {
        match self {
            Branch::Success => Branch::Failure,
            Branch::Failure => Branch::Success,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.edge_type())
    }
}

/// `AbstractNode` with the concrete kinds below it; all three edge types run
/// between abstract nodes.
pub fn syntax_typegraph() -> Arc<TypeGraph> {
    static TG: OnceLock<Arc<TypeGraph>> = OnceLock::new();
    TG.get_or_init(|| {
        let tg = TypeGraph::new(
            SYNTAX_TYPEGRAPH,
            [
                (ABSTRACT_NODE, None),
                (CF_NODE, Some(ABSTRACT_NODE)),
                (START_NODE, Some(ABSTRACT_NODE)),
                (STOP_NODE, Some(ABSTRACT_NODE)),
            ],
            [NEXT, SUCCESS, FAILURE].map(|e| (e, ABSTRACT_NODE, ABSTRACT_NODE)),
        )
        .expect("syntax type graph is well formed");
        Arc::new(tg)
    })
    .clone()
}

/// `start -next-> node -next-> stop`, the smallest valid control flow.
pub fn start_graph() -> TypedGraph {
    let mut g = TypedGraph::new(syntax_typegraph());
    g.add_node("start", START_NODE)
        .and_then(|g| g.add_node("node", CF_NODE))
        .and_then(|g| g.add_node("stop", STOP_NODE))
        .and_then(|g| g.add_edge("e1", "start", "node", NEXT))
        .and_then(|g| g.add_edge("e2", "node", "stop", NEXT))
        .expect("start graph is well formed");
    g
}
