use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{ScopeTree, StoryDiagram, VarId};
use crate::graph::NodeId;
use crate::syntax::{Branch, NodeClass, CF_NODE, NEXT, START_NODE};

/// A bound-marked variable that is not bound on some path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BindingViolation {
    pub node: NodeId,
    pub variable: String,
    /// A control-flow path from the start node to `node` along which the
    /// variable may be unbound.
    pub path: Vec<NodeId>,
}

impl fmt::Display for BindingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` may be unbound at node `{}` (path:", self.variable, self.node)?;
        for n in &self.path {
            write!(f, " {n}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BindingReport {
    pub violations: Vec<BindingViolation>,
}

impl BindingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Definitely-bound variables per open scope instance, outermost first.
type Stack = Vec<BTreeSet<VarId>>;

/// Checks that every variable marked bound in a pattern is bound whenever
/// control reaches that pattern, on every path.
///
/// Scope instances are modelled as a stack aligned with the template chain
/// of the current node. Entering a branch copies the enclosing bindings;
/// leaving it keeps in the parent only what the branch still has bound,
/// which under-approximates both exit policies.
pub fn validate_binding_marks(d: &StoryDiagram) -> BindingReport {
    let states = must_bound(d);
    let scopes = d.scopes();
    let mut violations = Vec::new();
    for (node, pat) in d.patterns() {
        let Some(state) = states.get(node) else { continue };
        let top = state.last().expect("stacks are never empty");
        for name in pat.bound_vars() {
            let v = scopes.resolve(node.as_str(), name).expect("pattern variables are declared");
            if !top.contains(&v) {
                violations.push(BindingViolation {
                    node: node.clone(),
                    variable: name.to_owned(),
                    path: witness_path(d, node, v),
                });
            }
        }
    }
    BindingReport { violations }
}

fn must_bound(d: &StoryDiagram) -> BTreeMap<NodeId, Stack> {
    let scopes = d.scopes();
    let start = d.cfg().start_node().clone();
    let root: BTreeSet<VarId> = d
        .params()
        .iter()
        .filter_map(|p| scopes.resolve_in(scopes.root(), &p.name))
        .collect();
    let mut states: BTreeMap<NodeId, Stack> = BTreeMap::from([(start.clone(), vec![root])]);
    let mut work = VecDeque::from([start]);
    while let Some(n) = work.pop_front() {
        let state = states[&n].clone();
        for (succ, out) in transfer(d, &n, state) {
            let out = unwind(scopes, out, &succ);
            let changed = match states.get_mut(&succ) {
                None => {
                    states.insert(succ.clone(), out);
                    true
                }
                Some(old) => {
                    let mut changed = false;
                    for (o, x) in old.iter_mut().zip(&out) {
                        let before = o.len();
                        o.retain(|v| x.contains(v));
                        changed |= o.len() != before;
                    }
                    changed
                }
            };
            if changed {
                work.push_back(succ);
            }
        }
    }
    states
}

fn target(d: &StoryDiagram, n: &NodeId, ty: &str) -> NodeId {
    d.cfg()
        .graph()
        .successors(n.as_str(), ty)
        .next()
        .expect("valid control flow")
        .clone()
}

/// Successor states before leaving finished scopes.
fn transfer(d: &StoryDiagram, n: &NodeId, mut state: Stack) -> Vec<(NodeId, Stack)> {
    let g = d.cfg().graph();
    let ty = g.node_type(n.as_str()).expect("node exists");
    if ty == START_NODE {
        return vec![(target(d, n, NEXT), state)];
    }
    if ty != CF_NODE {
        return Vec::new();
    }
    let effects = |mut s: BTreeSet<VarId>| {
        let scopes = d.scopes();
        let pat = &d.patterns()[n];
        let res = |name: &str| scopes.resolve(n.as_str(), name).expect("declared");
        let deleted: BTreeSet<VarId> = pat.deleted_vars().map(res).collect();
        s.extend(pat.lhs_vars().map(|(_, name)| res(name)));
        s.extend(pat.created_vars().map(|(_, name)| res(name)));
        s.retain(|v| !deleted.contains(v));
        s
    };
    let class = d.cfg().classification().get(n.as_str()).expect("classified");
    match class {
        NodeClass::Sequential => {
            let top = state.pop().expect("non-empty");
            state.push(effects(top));
            vec![(target(d, n, NEXT), state)]
        }
        _ => [Branch::Success, Branch::Failure]
            .into_iter()
            .map(|b| {
                let top = state.last().expect("non-empty").clone();
                let mut s = state.clone();
                s.push(if b == Branch::Success { effects(top) } else { top });
                (target(d, n, b.edge_type()), s)
            })
            .collect(),
    }
}

/// Leaves scope instances until the stack matches the target's template.
fn unwind(scopes: &ScopeTree, mut state: Stack, to: &NodeId) -> Stack {
    let depth = scopes.depth(scopes.template_of(to.as_str()).expect("every node has a template"));
    while state.len() > depth + 1 {
        let child = state.pop().expect("non-empty");
        state.last_mut().expect("non-empty").retain(|v| child.contains(v));
    }
    state
}

/// Shortest control-flow path to `node` along which `v` is unbound on
/// arrival, found by following the analysis along single paths without
/// merging. Falls back to any shortest path.
fn witness_path(d: &StoryDiagram, node: &NodeId, v: VarId) -> Vec<NodeId> {
    let scopes = d.scopes();
    let start = d.cfg().start_node().clone();
    let root: BTreeSet<VarId> = d
        .params()
        .iter()
        .filter_map(|p| scopes.resolve_in(scopes.root(), &p.name))
        .collect();
    let init = (start.clone(), vec![root]);
    let mut prev: BTreeMap<(NodeId, Stack), (NodeId, Stack)> = BTreeMap::new();
    let mut seen = BTreeSet::from([init.clone()]);
    let mut queue = VecDeque::from([init]);
    while let Some(cur) = queue.pop_front() {
        if cur.0 == *node && !cur.1.last().is_some_and(|top| top.contains(&v)) {
            let mut path = vec![cur.0.clone()];
            let mut at = cur;
            while let Some(p) = prev.get(&at) {
                path.push(p.0.clone());
                at = p.clone();
            }
            path.reverse();
            return path;
        }
        for (succ, out) in transfer(d, &cur.0, cur.1.clone()) {
            let next = (succ.clone(), unwind(scopes, out, &succ));
            if seen.insert(next.clone()) {
                prev.insert(next.clone(), cur.clone());
                queue.push_back(next);
            }
        }
    }
    shortest_path(d, node).unwrap_or_default()
}

fn shortest_path(d: &StoryDiagram, to: &NodeId) -> Option<Vec<NodeId>> {
    let g = d.cfg().graph();
    let start = d.cfg().start_node().clone();
    let mut prev: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(n) = queue.pop_front() {
        if n == *to {
            let mut path = vec![n.clone()];
            let mut cur = n;
            while let Some(p) = prev.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        for (_, e) in g.out_edges(n.as_str()) {
            if seen.insert(e.trg.clone()) {
                prev.insert(e.trg.clone(), n.clone());
                queue.push_back(e.trg.clone());
            }
        }
    }
    None
}
