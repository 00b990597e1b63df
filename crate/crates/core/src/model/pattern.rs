use std::collections::{BTreeMap, BTreeSet};

use crate::graph::NodeId;
use crate::spo::Rule;

/// A story pattern: a rule whose nodes carry variable names, some of them
/// marked as bound.
///
/// Names attach to left-hand side nodes and to created right-hand side
/// nodes; a preserved node keeps the name of its left-hand side original.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoryPattern {
    rule: Rule,
    names: BTreeMap<NodeId, String>,
    bound: BTreeSet<String>,
}

/// One `vars` entry: which element, its name, whether it is bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub elem: String,
    pub name: String,
    pub bound: bool,
}

impl StoryPattern {
    /// Unnamed elements are named after their id.
    pub fn new(rule: Rule, vars: &[VarDecl]) -> Result<Self, String> {
        let created: BTreeSet<NodeId> = rule.created_nodes().cloned().collect();
        let mut names = BTreeMap::new();
        let mut bound = BTreeSet::new();
        for v in vars {
            let in_lhs = rule.lhs().has_node(&v.elem);
            if !in_lhs && !created.contains(v.elem.as_str()) {
                return Err(if rule.rhs().has_node(&v.elem) {
                    format!("`{}` is preserved; name its left-hand side node instead", v.elem)
                } else {
                    format!("`{}` is not a pattern node", v.elem)
                });
            }
            if names.insert(NodeId::from(&v.elem), v.name.clone()).is_some() {
                return Err(format!("`{}` is named twice", v.elem));
            }
            if v.bound {
                if !in_lhs {
                    return Err(format!("`{}` is created and cannot be bound", v.name));
                }
                bound.insert(v.name.clone());
            }
        }
        for n in rule.lhs().node_ids().chain(created.iter()) {
            names.entry(n.clone()).or_insert_with(|| n.to_string());
        }
        let mut seen = BTreeSet::new();
        for name in names.values() {
            if !seen.insert(name) {
                return Err(format!("variable `{name}` names two nodes"));
            }
        }
        Ok(StoryPattern { rule, names, bound })
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn is_bound(&self, name: &str) -> bool {
        self.bound.contains(name)
    }

    pub fn bound_vars(&self) -> impl Iterator<Item = &str> {
        self.bound.iter().map(String::as_str)
    }

    /// Name of a left-hand side node or of a created right-hand side node.
    pub fn name_of(&self, node: &str) -> Option<&str> {
        self.names.get(node).map(String::as_str)
    }

    /// `(node, name)` for every left-hand side node.
    pub fn lhs_vars(&self) -> impl Iterator<Item = (&NodeId, &str)> {
        self.rule
            .lhs()
            .node_ids()
            .map(|n| (n, self.names[n].as_str()))
    }

    /// `(node, name)` for every created right-hand side node.
    pub fn created_vars(&self) -> impl Iterator<Item = (&NodeId, &str)> {
        let names = &self.names;
        self.rule.created_nodes().map(move |n| (n, names[n].as_str()))
    }

    /// Names of left-hand side nodes the rule deletes.
    pub fn deleted_vars(&self) -> impl Iterator<Item = &str> {
        self.rule.deleted_nodes().map(|n| self.names[n].as_str())
    }

    /// Every variable the pattern mentions.
    pub fn var_names(&self) -> BTreeSet<&str> {
        self.names.values().map(String::as_str).collect()
    }

    /// Type of the node called `name`, from whichever side declares it.
    pub fn var_type(&self, name: &str) -> Option<&str> {
        let (node, _) = self.names.iter().find(|(_, n)| n.as_str() == name)?;
        self.rule
            .lhs()
            .node_type(node.as_str())
            .or_else(|| self.rule.rhs().node_type(node.as_str()))
    }

    /// Entries for the `vars` list of a document.
    pub fn var_decls(&self) -> Vec<VarDecl> {
        self.names
            .iter()
            .map(|(elem, name)| VarDecl {
                elem: elem.to_string(),
                name: name.clone(),
                bound: self.bound.contains(name),
            })
            .collect()
    }
}
