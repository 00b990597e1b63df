use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Param, StoryPattern};
use crate::graph::NodeId;
use crate::syntax::{Branch, NodeClass, ValidatedCfg, CF_NODE, NEXT, STOP_NODE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TemplateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// What a scope template hangs off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateKind {
    Root,
    /// A branch of a conditional whose branches meet again.
    JoinBranch,
    /// A branch of a conditional whose branches end in separate stop nodes.
    SplitBranch,
    LoopBody,
    /// The leaving branch of a loop head. Always empty: the exit target
    /// stays in the loop's own template.
    LoopExit,
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemplateKind::Root => "root",
            TemplateKind::JoinBranch => "join-branch",
            TemplateKind::SplitBranch => "split-branch",
            TemplateKind::LoopBody => "loop-body",
            TemplateKind::LoopExit => "loop-exit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeTemplate {
    /// `root`, or `<conditional>.success` / `<conditional>.failure`.
    pub id: String,
    pub kind: TemplateKind,
    pub parent: Option<TemplateId>,
    /// The conditional and branch this template belongs to.
    pub origin: Option<(NodeId, Branch)>,
    pub members: BTreeSet<NodeId>,
    pub declared: Vec<VarId>,
}

/// A variable declared in a scope template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfVariable {
    pub name: String,
    pub ty: String,
    pub template: TemplateId,
}

/// Static scopes of a diagram and the variables they declare.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeTree {
    templates: Vec<ScopeTemplate>,
    variables: Vec<CfVariable>,
    node_template: BTreeMap<NodeId, TemplateId>,
    branch_templates: BTreeMap<(NodeId, Branch), TemplateId>,
}

impl ScopeTree {
    pub fn root(&self) -> TemplateId {
        TemplateId(0)
    }

    pub fn templates(&self) -> &[ScopeTemplate] {
        &self.templates
    }

    pub fn template(&self, t: TemplateId) -> &ScopeTemplate {
        &self.templates[t.0]
    }

    pub fn variables(&self) -> &[CfVariable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &CfVariable {
        &self.variables[v.0]
    }

    /// `<template>/<name>`, unique per variable.
    pub fn variable_key(&self, v: VarId) -> String {
        let var = self.variable(v);
        format!("{}/{}", self.template(var.template).id, var.name)
    }

    pub fn template_of(&self, node: &str) -> Option<TemplateId> {
        self.node_template.get(node).copied()
    }

    pub fn branch_template(&self, cond: &str, b: Branch) -> Option<TemplateId> {
        self.branch_templates.get(&(NodeId::from(cond), b)).copied()
    }

    /// `t` followed by its ancestors up to the root.
    pub fn chain(&self, t: TemplateId) -> Vec<TemplateId> {
        let mut out = vec![t];
        let mut cur = t;
        while let Some(p) = self.template(cur).parent {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Root has depth 0.
    pub fn depth(&self, t: TemplateId) -> usize {
        self.chain(t).len() - 1
    }

    pub fn max_depth(&self) -> usize {
        (0..self.templates.len())
            .map(|i| self.depth(TemplateId(i)))
            .max()
            .unwrap_or(0)
    }

    /// The variable `name` refers to when used in `node`.
    pub fn resolve(&self, node: &str, name: &str) -> Option<VarId> {
        let t = self.template_of(node)?;
        self.resolve_in(t, name)
    }

    pub fn resolve_in(&self, t: TemplateId, name: &str) -> Option<VarId> {
        self.chain(t).into_iter().find_map(|t| {
            self.template(t)
                .declared
                .iter()
                .copied()
                .find(|v| self.variable(*v).name == name)
        })
    }

    /// Variables declared in `t` or one of its ancestors.
    pub fn visible(&self, t: TemplateId) -> Vec<VarId> {
        self.chain(t)
            .into_iter()
            .flat_map(|t| self.template(t).declared.iter().copied())
            .collect()
    }
}

/// Partitions the control-flow nodes into scope templates and declares the
/// pattern variables.
///
/// The root template holds everything outside conditional branches. Each
/// branch of each conditional gets a child template holding the branch's
/// nodes up to, not including, the join node (joining conditionals), the
/// loop head (loop bodies) or the end of the branch (non-joining
/// conditionals). A variable is declared in the shallowest templates in
/// which it occurs, so every occurrence resolves upwards to one declaration.
pub fn analyze_scopes(
    cfg: &ValidatedCfg,
    patterns: &BTreeMap<NodeId, StoryPattern>,
    params: &[Param],
) -> Result<ScopeTree, String> {
    let mut b = Builder {
        cfg,
        tree: ScopeTree {
            templates: vec![ScopeTemplate {
                id: "root".into(),
                kind: TemplateKind::Root,
                parent: None,
                origin: None,
                members: BTreeSet::new(),
                declared: Vec::new(),
            }],
            variables: Vec::new(),
            node_template: BTreeMap::new(),
            branch_templates: BTreeMap::new(),
        },
    };
    b.walk(cfg.start_node().clone(), TemplateId(0), &BTreeSet::new())?;
    let g = cfg.graph();
    if let Some(n) = g.node_ids().find(|n| !b.tree.node_template.contains_key(*n)) {
        return Err(format!("node `{n}` is unreachable from the start node"));
    }

    // name -> template -> type of its first occurrence there
    let mut occurs: BTreeMap<String, BTreeMap<TemplateId, String>> = BTreeMap::new();
    for p in params {
        occurs
            .entry(p.name.clone())
            .or_default()
            .insert(TemplateId(0), p.ty.clone());
    }
    for (node, pat) in patterns {
        let t = b.tree.node_template[node];
        for name in pat.var_names() {
            let ty = pat.var_type(name).expect("named nodes have types").to_owned();
            occurs.entry(name.to_owned()).or_default().entry(t).or_insert(ty);
        }
    }
    let mut decls: Vec<(TemplateId, String, String)> = Vec::new();
    for (name, at) in &occurs {
        for (t, ty) in at {
            let shadowed = b.tree.chain(*t)[1..].iter().any(|a| at.contains_key(a));
            if !shadowed {
                decls.push((*t, name.clone(), ty.clone()));
            }
        }
    }
    decls.sort();
    for (t, name, ty) in decls {
        let v = VarId(b.tree.variables.len());
        b.tree.variables.push(CfVariable { name, ty, template: t });
        b.tree.templates[t.0].declared.push(v);
    }
    Ok(b.tree)
}

struct Builder<'a> {
    cfg: &'a ValidatedCfg,
    tree: ScopeTree,
}

impl Builder<'_> {
    fn child(&mut self, parent: TemplateId, cond: &NodeId, b: Branch, kind: TemplateKind) -> TemplateId {
        let id = TemplateId(self.tree.templates.len());
        self.tree.templates.push(ScopeTemplate {
            id: format!("{cond}.{b}"),
            kind,
            parent: Some(parent),
            origin: Some((cond.clone(), b)),
            members: BTreeSet::new(),
            declared: Vec::new(),
        });
        self.tree.branch_templates.insert((cond.clone(), b), id);
        id
    }

    fn target(&self, n: &NodeId, ty: &str) -> Result<NodeId, String> {
        self.cfg
            .graph()
            .successors(n.as_str(), ty)
            .next()
            .cloned()
            .ok_or_else(|| format!("node `{n}` has no `{ty}` edge"))
    }

    fn walk(&mut self, mut n: NodeId, t: TemplateId, stop_at: &BTreeSet<NodeId>) -> Result<(), String> {
        let g = self.cfg.graph();
        loop {
            if stop_at.contains(&n) || self.tree.node_template.contains_key(&n) {
                return Ok(());
            }
            self.tree.node_template.insert(n.clone(), t);
            self.tree.templates[t.0].members.insert(n.clone());
            let ty = g.node_type(n.as_str()).expect("node exists");
            if ty == STOP_NODE {
                return Ok(());
            }
            if ty != CF_NODE {
                n = self.target(&n, NEXT)?;
                continue;
            }
            let class = self
                .cfg
                .classification()
                .get(n.as_str())
                .cloned()
                .ok_or_else(|| format!("node `{n}` is unclassified"))?;
            match class {
                NodeClass::Sequential => n = self.target(&n, NEXT)?,
                NodeClass::ConditionalJoining { join } => {
                    let mut inner = stop_at.clone();
                    inner.insert(join.clone());
                    for b in [Branch::Success, Branch::Failure] {
                        let c = self.child(t, &n, b, TemplateKind::JoinBranch);
                        self.walk(self.target(&n, b.edge_type())?, c, &inner)?;
                    }
                    n = join;
                }
                NodeClass::ConditionalNonjoining { .. } => {
                    for b in [Branch::Success, Branch::Failure] {
                        let c = self.child(t, &n, b, TemplateKind::SplitBranch);
                        self.walk(self.target(&n, b.edge_type())?, c, stop_at)?;
                    }
                    return Ok(());
                }
                NodeClass::LoopHead { body } => {
                    let mut inner = stop_at.clone();
                    inner.insert(n.clone());
                    let c = self.child(t, &n, body, TemplateKind::LoopBody);
                    self.walk(self.target(&n, body.edge_type())?, c, &inner)?;
                    self.child(t, &n, body.other(), TemplateKind::LoopExit);
                    n = self.target(&n, body.other().edge_type())?;
                }
            }
        }
    }
}
