use super::{
    start_graph, syntax_typegraph, Branch, ABSTRACT_NODE, CF_NODE, NEXT, STOP_NODE,
};
use crate::spo::{GraphGrammar, Mark, Rule, RuleBuilder};

/// Shape of a syntax rule. Every rule replaces one `a -next-> b` edge.
///
/// Node roles in the right-hand side: `a`, `b` are the preserved endpoints,
/// `c` is the inserted sequential or conditional node, `x`, `x2` are branch
/// or loop-body nodes, `y` is the extra node of a failure branch or loop exit,
/// and `t` is a new stop node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntaxRuleKind {
    /// `a -> c -> b`
    Sequential,
    /// `c` branches into `x` and `y`, both continuing to `b`.
    JoiningConditional,
    /// One branch of `c` continues to `b`, the `opened` one ends in a new
    /// stop node `t`, directly or through a node `y`.
    NonJoining { opened: Branch, with_node: bool },
    /// `c` re-enters itself along `body` through `body_nodes` nodes and
    /// leaves along the other branch to `b`, directly or through `y`.
    Loop {
        body: Branch,
        body_nodes: usize,
        exit_via_node: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleCategory {
    Sequential,
    JoiningConditional,
    NonJoiningConditional,
    Loop,
}

impl SyntaxRuleKind {
    pub fn category(&self) -> RuleCategory {
        match self {
            SyntaxRuleKind::Sequential => RuleCategory::Sequential,
            SyntaxRuleKind::JoiningConditional => RuleCategory::JoiningConditional,
            SyntaxRuleKind::NonJoining { .. } => RuleCategory::NonJoiningConditional,
            SyntaxRuleKind::Loop { .. } => RuleCategory::Loop,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntaxRule {
    pub rule: Rule,
    pub kind: SyntaxRuleKind,
}

/// The sixteen insertion rules: one sequential, one joining conditional,
/// four non-joining conditionals and ten loops. The failure-polarity rules are
/// the success-polarity ones with `success` and `failure` exchanged.
pub fn syntax_rules() -> Vec<SyntaxRule> {
    let mut kinds = vec![SyntaxRuleKind::Sequential, SyntaxRuleKind::JoiningConditional];
    for opened in [Branch::Failure, Branch::Success] {
        for with_node in [false, true] {
            kinds.push(SyntaxRuleKind::NonJoining { opened, with_node });
        }
    }
    for body in [Branch::Success, Branch::Failure] {
        kinds.push(SyntaxRuleKind::Loop {
            body,
            body_nodes: 0,
            exit_via_node: false,
        });
        for body_nodes in [1, 2] {
            for exit_via_node in [false, true] {
                kinds.push(SyntaxRuleKind::Loop {
                    body,
                    body_nodes,
                    exit_via_node,
                });
            }
        }
    }
    kinds
        .into_iter()
        .map(|kind| SyntaxRule {
            rule: build(kind),
            kind,
        })
        .collect()
}

/// The start graph with all sixteen rules.
pub fn syntax_grammar() -> GraphGrammar {
    GraphGrammar::new(start_graph(), syntax_rules().into_iter().map(|r| r.rule).collect())
        .expect("syntax rules share the syntax type graph")
}

fn rule_name(kind: SyntaxRuleKind) -> String {
    match kind {
        SyntaxRuleKind::Sequential => "sequence".into(),
        SyntaxRuleKind::JoiningConditional => "conditional-join".into(),
        SyntaxRuleKind::NonJoining { opened, with_node } => {
            let tail = if with_node { "node" } else { "stop" };
            format!("conditional-open-{opened}-{tail}")
        }
        SyntaxRuleKind::Loop {
            body,
            body_nodes,
            exit_via_node,
        } => {
            let len = match body_nodes {
                0 => "direct".to_owned(),
                n => (n + 1).to_string(),
            };
            let tail = if exit_via_node { "-exit-node" } else { "" };
            format!("loop-{body}-{len}{tail}")
        }
    }
}

fn build(kind: SyntaxRuleKind) -> Rule {
    let tg = syntax_typegraph();
    let mut b = RuleBuilder::new(rule_name(kind), &tg)
        .keep("a", ABSTRACT_NODE)
        .keep("b", ABSTRACT_NODE)
        .edge_with_id("ab", "a", NEXT, "b", Mark::Delete)
        .create("c", CF_NODE)
        .edge("a", NEXT, "c", Mark::Create);
    match kind {
        SyntaxRuleKind::Sequential => {
            b = b.edge("c", NEXT, "b", Mark::Create);
        }
        SyntaxRuleKind::JoiningConditional => {
            b = b
                .create("x", CF_NODE)
                .create("y", CF_NODE)
                .edge("c", Branch::Success.edge_type(), "x", Mark::Create)
                .edge("c", Branch::Failure.edge_type(), "y", Mark::Create)
                .edge("x", NEXT, "b", Mark::Create)
                .edge("y", NEXT, "b", Mark::Create);
        }
        SyntaxRuleKind::NonJoining { opened, with_node } => {
            b = b
                .create("t", STOP_NODE)
                .edge("c", opened.other().edge_type(), "b", Mark::Create);
            b = if with_node {
                b.create("y", CF_NODE)
                    .edge("c", opened.edge_type(), "y", Mark::Create)
                    .edge("y", NEXT, "t", Mark::Create)
            } else {
                b.edge("c", opened.edge_type(), "t", Mark::Create)
            };
        }
        SyntaxRuleKind::Loop {
            body,
            body_nodes,
            exit_via_node,
        } => {
            let body_ids = ["x", "x2"];
            let mut prev = "c";
            let mut ty = body.edge_type();
            for id in &body_ids[..body_nodes] {
                b = b.create(id, CF_NODE).edge(prev, ty, id, Mark::Create);
                prev = id;
                ty = NEXT;
            }
            b = b.edge(prev, ty, "c", Mark::Create);
            let exit = body.other().edge_type();
            b = if exit_via_node {
                b.create("y", CF_NODE)
                    .edge("c", exit, "y", Mark::Create)
                    .edge("y", NEXT, "b", Mark::Create)
            } else {
                b.edge("c", exit, "b", Mark::Create)
            };
        }
    }
    b.build().expect("syntax rules are well formed")
}
