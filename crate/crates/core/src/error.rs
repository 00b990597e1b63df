use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("type `{0}` declared twice")]
    DuplicateType(String),
    #[error("unknown node type `{0}`")]
    UnknownNodeType(String),
    #[error("unknown edge type `{0}`")]
    UnknownEdgeType(String),
    #[error("inheritance cycle through node type `{0}`")]
    InheritanceCycle(String),
    #[error("node type `{0}` declares more than one parent")]
    MultipleInheritance(String),
    #[error("id `{0}` used more than once")]
    DuplicateId(String),
    #[error("edge `{edge}` references missing node `{node}`")]
    DanglingEdge { edge: String, node: String },
    #[error("graph is typed over `{found}`, expected `{expected}`")]
    TypeGraphMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("rule `{rule}`: {reason}")]
    InvalidRule { rule: String, reason: String },
    #[error("partial assignment is not usable: {0}")]
    InvalidPartial(String),
    #[error("match does not belong to this host: {0}")]
    InvalidMatch(String),
    #[error("stale match: host changed since the match was computed")]
    StaleMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("start graph and rule `{0}` are typed over different type graphs")]
    TypeGraphMismatch(String),
    #[error("node bound {max} is below the start graph size {start}")]
    BoundBelowStart { start: usize, max: usize },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// A control-flow graph outside the syntax language, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct InvalidCfg(pub String);

/// Failure to turn a story-diagram document into a runnable diagram.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{context}: {source}")]
    Graph {
        context: String,
        #[source]
        source: GraphError,
    },
    #[error("{context}: {source}")]
    Rule {
        context: String,
        #[source]
        source: RuleError,
    },
    #[error("invalid control flow: {0}")]
    InvalidCfg(String),
    #[error("invalid diagram: {0}")]
    Diagram(String),
    #[error("binding marks violated: {0}")]
    Binding(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("configuration is not running")]
    NotRunning,
    #[error("cannot bind `this`: {0}")]
    BadThis(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("model has {nodes} nodes, oracle bound is {bound}")]
    Oversized { nodes: usize, bound: usize },
    #[error("not covered by the set semantics: {0}")]
    Unsupported(String),
    #[error("trace does not replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}
