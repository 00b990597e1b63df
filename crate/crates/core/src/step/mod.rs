//! The step interpreter.
//!
//! A [`Configuration`] pairs an [`ExecState`] with the model under
//! manipulation. Each [`Configuration::step`] invokes the pattern at the
//! position token and then applies the semantic rules of
//! [`semantic_rules`] to move the token, update bindings and open or close
//! scope instances.

mod exec;
mod semantics;
mod state;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use exec::{Configuration, ConfigurationDoc, MatchedInvocation, PatternInvocationResult};
pub use semantics::*;
pub use state::{BindingView, ExecState, StateDoc};
pub use trace::{replay, MatchEntry, StepOutcome, StepRecord, Trace};

use crate::graph::NodeId;

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// What happens to parent bindings when a branch scope is left.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Parent bindings the branch no longer has are dropped; branch
    /// bindings stay behind.
    #[default]
    Conservative,
    /// Parent bindings are kept; a joining branch's bindings of visible
    /// variables are copied up.
    Optimistic,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Conservative => "conservative",
            Strategy::Optimistic => "optimistic",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conservative" => Ok(Strategy::Conservative),
            "optimistic" => Ok(Strategy::Optimistic),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

/// Which match an invocation takes when several exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MatchOrder {
    /// The first in the matcher's sorted order.
    #[default]
    Lex,
    /// A node assignment drawn with a seeded generator.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Running,
    Terminated,
    /// The pattern at `node` failed on a sequential node.
    Error { node: NodeId },
    /// The step budget ran out.
    Nonterminating,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Running => f.write_str("running"),
            Status::Terminated => f.write_str("terminated"),
            Status::Error { node } => write!(f, "error at `{node}`"),
            Status::Nonterminating => f.write_str("nonterminating"),
        }
    }
}
