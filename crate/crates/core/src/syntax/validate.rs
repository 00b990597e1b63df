use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::classify::classify;
use super::{
    start_graph, syntax_rules, NodeClassification, SyntaxRule, CF_NODE, NEXT, START_NODE,
    STOP_NODE, SYNTAX_TYPEGRAPH,
};
use crate::error::InvalidCfg;
use crate::graph::{
    are_isomorphic, canonical_form, validate_typing, CanonicalCode, NodeId, TypedGraph,
};
use crate::spo::{apply_rule, find_matches, Match, Rule};

/// One forward rule application: the rule and where each of its right-hand
/// side nodes ended up in the control-flow graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub rule: String,
    pub nodes: BTreeMap<String, NodeId>,
}

/// Forward derivation from the start graph. `start` names the graph's own
/// start, story and stop node that the derivation begins with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub start: [NodeId; 3],
    pub steps: Vec<DerivationStep>,
}

/// A control-flow graph together with a derivation witnessing membership
/// in the syntax language. Only obtainable by checking.
#[derive(Clone, Debug)]
pub struct ValidatedCfg {
    graph: TypedGraph,
    derivation: Derivation,
    classes: NodeClassification,
}

impl ValidatedCfg {
    /// Accepts a graph with a claimed derivation after replaying it.
    pub fn from_witness(graph: TypedGraph, derivation: Derivation) -> Result<Self, InvalidCfg> {
        let replayed = derivation.replay()?;
        if !same_structure(&replayed, &graph) {
            return Err(InvalidCfg("derivation does not produce this graph".into()));
        }
        let classes = classify(&graph, &derivation);
        Ok(ValidatedCfg {
            graph,
            derivation,
            classes,
        })
    }

    pub fn graph(&self) -> &TypedGraph {
        &self.graph
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn classification(&self) -> &NodeClassification {
        &self.classes
    }

    pub fn start_node(&self) -> &NodeId {
        &self.derivation.start[0]
    }
}

impl Derivation {
    /// Rebuilds the graph the derivation describes, with fresh edge ids.
    pub fn replay(&self) -> Result<TypedGraph, InvalidCfg> {
        let bad = |m: String| InvalidCfg(m);
        let [s, n, t] = &self.start;
        let mut g = TypedGraph::new(super::syntax_typegraph());
        g.add_node(s, START_NODE)
            .and_then(|g| g.add_node(n, CF_NODE))
            .and_then(|g| g.add_node(t, STOP_NODE))
            .map_err(|e| bad(e.to_string()))?;
        add_edge(&mut g, s, n, NEXT)?;
        add_edge(&mut g, n, t, NEXT)?;
        let rules = syntax_rules();
        for (i, step) in self.steps.iter().enumerate() {
            let rule = &rules
                .iter()
                .find(|r| r.rule.name() == step.rule)
                .ok_or_else(|| bad(format!("step {i}: unknown rule `{}`", step.rule)))?
                .rule;
            let at = |role: &str| {
                step.nodes
                    .get(role)
                    .ok_or_else(|| bad(format!("step {i}: role `{role}` unassigned")))
            };
            let (a, b) = (at("a")?, at("b")?);
            let old = g
                .out_edges(a.as_str())
                .find(|(_, e)| e.trg == *b && e.ty == NEXT)
                .map(|(id, _)| id.clone())
                .ok_or_else(|| bad(format!("step {i}: no `next` edge {a} -> {b}")))?;
            g.remove_edge(&old);
            for r in rule.created_nodes() {
                let ty = rule.rhs().node_type(r.as_str()).expect("rhs node");
                if g.has_node(at(r.as_str())?.as_str()) {
                    return Err(bad(format!("step {i}: node `{}` already exists", at(r.as_str())?)));
                }
                g.add_node(at(r.as_str())?, ty).map_err(|e| bad(e.to_string()))?;
            }
            for (_, e) in rule.rhs().edges() {
                add_edge(&mut g, at(e.src.as_str())?, at(e.trg.as_str())?, &e.ty)?;
            }
        }
        Ok(g)
    }
}

fn add_edge(g: &mut TypedGraph, s: &NodeId, t: &NodeId, ty: &str) -> Result<(), InvalidCfg> {
    let id = g.fresh_edge_id();
    g.add_edge(id, s, t, ty)
        .map(|_| ())
        .map_err(|e| InvalidCfg(e.to_string()))
}

/// Same node ids and types, same multiset of `(src, trg, type)` edges.
fn same_structure(g: &TypedGraph, h: &TypedGraph) -> bool {
    let triples = |g: &TypedGraph| {
        let mut v: Vec<_> = g.edges().map(|(_, e)| (e.src.clone(), e.trg.clone(), e.ty.clone())).collect();
        v.sort();
        v
    };
    g.nodes().eq(h.nodes()) && triples(g) == triples(h)
}

/// Decides membership in the syntax language by undoing rule applications.
///
/// An inverse step matches a rule's right-hand side, requires the nodes the
/// rule created to carry no other edges, deletes them and restores the
/// `a -next-> b` edge. Every step removes nodes, so the search terminates;
/// graphs that failed once are remembered by canonical code.
pub fn validate_control_flow(cfg: &TypedGraph) -> Result<ValidatedCfg, InvalidCfg> {
    if cfg.typegraph().name() != SYNTAX_TYPEGRAPH {
        return Err(InvalidCfg(format!(
            "typed over `{}`, not the syntax type graph",
            cfg.typegraph().name()
        )));
    }
    let report = validate_typing(cfg, cfg.typegraph());
    if let Some(v) = report.violations.first() {
        return Err(InvalidCfg(format!("ill-typed: {v}")));
    }
    let mut rules: Vec<(SyntaxRule, Rule)> = syntax_rules()
        .into_iter()
        .map(|r| {
            let inv = r.rule.inverted();
            (r, inv)
        })
        .collect();
    rules.sort_by(|(a, _), (b, _)| {
        b.rule
            .rhs()
            .node_count()
            .cmp(&a.rule.rhs().node_count())
            .then_with(|| a.rule.name().cmp(b.rule.name()))
    });
    let mut search = Reducer {
        rules,
        start: start_graph(),
        failed: HashSet::new(),
    };
    match search.reduce(cfg) {
        Some(derivation) => {
            let classes = classify(cfg, &derivation);
            Ok(ValidatedCfg {
                graph: cfg.clone(),
                derivation,
                classes,
            })
        }
        None => Err(InvalidCfg(if cfg.node_count() < 3 {
            "fewer nodes than the start graph".into()
        } else {
            "does not reduce to the start graph".into()
        })),
    }
}

struct Reducer {
    rules: Vec<(SyntaxRule, Rule)>,
    start: TypedGraph,
    failed: HashSet<CanonicalCode>,
}

impl Reducer {
    fn reduce(&mut self, g: &TypedGraph) -> Option<Derivation> {
        let n = g.node_count();
        if n < self.start.node_count() {
            return None;
        }
        if n == self.start.node_count() {
            if !are_isomorphic(g, &self.start) {
                return None;
            }
            let of = |ty: &str| g.nodes_of_type(ty).next().expect("typed like the start graph").clone();
            return Some(Derivation {
                start: [of(START_NODE), of(CF_NODE), of(STOP_NODE)],
                steps: Vec::new(),
            });
        }
        let code = canonical_form(g).code;
        if self.failed.contains(&code) {
            return None;
        }
        for i in 0..self.rules.len() {
            let inv = self.rules[i].1.clone();
            let matches = find_matches(&inv, g, None).unwrap_or_default();
            for m in matches {
                if !created_nodes_isolated(&self.rules[i].0.rule, &m, g) {
                    continue;
                }
                let smaller = apply_rule(&inv, &m, g).expect("fresh match").result;
                if let Some(mut d) = self.reduce(&smaller) {
                    d.steps.push(DerivationStep {
                        rule: self.rules[i].0.rule.name().to_owned(),
                        nodes: m
                            .morphism()
                            .nodes
                            .iter()
                            .map(|(r, h)| (r.to_string(), h.clone()))
                            .collect(),
                    });
                    return Some(d);
                }
            }
        }
        self.failed.insert(code);
        None
    }
}

/// Dangling condition for an inverse step: nodes the forward rule created
/// may only carry the edges the rule created with them.
fn created_nodes_isolated(rule: &Rule, m: &Match, g: &TypedGraph) -> bool {
    let rhs = rule.rhs();
    rule.created_nodes().all(|r| {
        let h = &m.morphism().nodes[r];
        degree(g, h.as_str()) == degree(rhs, r.as_str())
    })
}

fn degree(g: &TypedGraph, n: &str) -> usize {
    g.out_edges(n).count() + g.in_edges(n).filter(|(_, e)| e.src.as_str() != n).count()
}
