//! Executable story diagrams.
//!
//! The crate is layered bottom-up:
//!
//! - [`graph`]: typed multigraphs, morphisms, isomorphism and JSON documents;
//! - [`spo`]: single-pushout rewriting and graph grammars;
//! - [`syntax`]: the control-flow grammar, its validator and node classes;
//! - [`model`]: story diagrams, scope analysis and binding-mark checks;
//! - [`step`]: the step interpreter with scopes, bindings and traces;
//! - [`oracle`]: brute-force set semantics used to cross-check runs.

pub mod error;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod spo;
pub mod step;
pub mod syntax;

pub use error::{ExecError, GrammarError, GraphError, InvalidCfg, LoadError, OracleError, RuleError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/rewriting.md")]
    mod rewriting {}
    #[doc = include_str!("../../../book/src/syntax.md")]
    mod syntax {}
    #[doc = include_str!("../../../book/src/diagrams.md")]
    mod diagrams {}
    #[doc = include_str!("../../../book/src/execution.md")]
    mod execution {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
