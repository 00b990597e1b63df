use std::fmt;

use super::{TypeGraph, TypedGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownNodeType(String),
    UnknownEdgeType(String),
    MissingSource(String),
    MissingTarget(String),
    /// The source node's type does not conform to the edge type's source.
    SourceNotConforming { expected: String, found: String },
    TargetNotConforming { expected: String, found: String },
}

/// One broken typing rule, attributed to a node or an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub element: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::UnknownNodeType(t) => {
                write!(f, "node `{}`: unknown node type `{t}`", self.element)
            }
            ViolationKind::UnknownEdgeType(t) => {
                write!(f, "edge `{}`: unknown edge type `{t}`", self.element)
            }
            ViolationKind::MissingSource(n) => {
                write!(f, "edge `{}`: source `{n}` does not exist", self.element)
            }
            ViolationKind::MissingTarget(n) => {
                write!(f, "edge `{}`: target `{n}` does not exist", self.element)
            }
            ViolationKind::SourceNotConforming { expected, found } => write!(
                f,
                "edge `{}`: source has type `{found}`, which does not conform to `{expected}`",
                self.element
            ),
            ViolationKind::TargetNotConforming { expected, found } => write!(
                f,
                "edge `{}`: target has type `{found}`, which does not conform to `{expected}`",
                self.element
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingReport {
    pub violations: Vec<Violation>,
}

impl TypingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `g` against `tg`: every node and edge type exists, every edge has
/// both endpoints, and endpoint types conform to the edge type's declared
/// endpoints (up to inheritance).
pub fn validate_typing(g: &TypedGraph, tg: &TypeGraph) -> TypingReport {
    let mut violations = Vec::new();
    for (id, ty) in g.nodes() {
        if !tg.has_node_type(ty) {
            violations.push(Violation {
                element: id.to_string(),
                kind: ViolationKind::UnknownNodeType(ty.to_owned()),
            });
        }
    }
    for (id, e) in g.edges() {
        let src_ty = g.node_type(e.src.as_str());
        let trg_ty = g.node_type(e.trg.as_str());
        if src_ty.is_none() {
            violations.push(Violation {
                element: id.to_string(),
                kind: ViolationKind::MissingSource(e.src.to_string()),
            });
        }
        if trg_ty.is_none() {
            violations.push(Violation {
                element: id.to_string(),
                kind: ViolationKind::MissingTarget(e.trg.to_string()),
            });
        }
        let Some(et) = tg.edge_type(&e.ty) else {
            violations.push(Violation {
                element: id.to_string(),
                kind: ViolationKind::UnknownEdgeType(e.ty.clone()),
            });
            continue;
        };
        if let Some(s) = src_ty {
            if !tg.conforms(s, &et.src) {
                violations.push(Violation {
                    element: id.to_string(),
                    kind: ViolationKind::SourceNotConforming {
                        expected: et.src.clone(),
                        found: s.to_owned(),
                    },
                });
            }
        }
        if let Some(t) = trg_ty {
            if !tg.conforms(t, &et.trg) {
                violations.push(Violation {
                    element: id.to_string(),
                    kind: ViolationKind::TargetNotConforming {
                        expected: et.trg.clone(),
                        found: t.to_owned(),
                    },
                });
            }
        }
    }
    TypingReport { violations }
}
