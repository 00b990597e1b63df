use std::collections::{BTreeMap, VecDeque};

use super::{apply_rule, find_matches, Rule};
use crate::error::GrammarError;
use crate::graph::{canonical_form, find_isomorphism, invariant_hash, CanonicalCode, TypedGraph};

/// A start graph and a rule set over one type graph.
#[derive(Clone, Debug)]
pub struct GraphGrammar {
    start: TypedGraph,
    rules: Vec<Rule>,
}

impl GraphGrammar {
    pub fn new(start: TypedGraph, rules: Vec<Rule>) -> Result<Self, GrammarError> {
        let tg = start.typegraph().name();
        if let Some(r) = rules.iter().find(|r| r.typegraph().name() != tg) {
            return Err(GrammarError::TypeGraphMismatch(r.name().to_owned()));
        }
        Ok(GraphGrammar { start, rules })
    }

    pub fn start(&self) -> &TypedGraph {
        &self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// True if no rule can shrink the node count.
    pub fn is_monotone(&self) -> bool {
        self.rules.iter().all(Rule::is_monotone)
    }
}

/// The members of a bounded language, one representative per isomorphism
/// class, ordered by size and then by canonical code.
#[derive(Clone, Debug)]
pub struct Language {
    pub members: Vec<TypedGraph>,
    /// Soundness caveats about the search, e.g. pruning a non-monotone grammar.
    pub warnings: Vec<String>,
}

impl Language {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the member isomorphic to `g`, if any.
    pub fn position(&self, g: &TypedGraph) -> Option<usize> {
        self.members
            .iter()
            .position(|m| matches!(find_isomorphism(m, g), Ok(Some(_))))
    }

    pub fn contains(&self, g: &TypedGraph) -> bool {
        self.position(g).is_some()
    }
}

/// Breadth-first closure of the start graph under all rule applications,
/// discarding graphs with more than `max_nodes` nodes.
///
/// Pruning is exact only for monotone grammars; otherwise a graph reachable
/// solely through an oversized intermediate is missed and a warning says so.
pub fn enumerate_language(grammar: &GraphGrammar, max_nodes: usize) -> Result<Language, GrammarError> {
    let start = grammar.start();
    if max_nodes < start.node_count() {
        return Err(GrammarError::BoundBelowStart {
            start: start.node_count(),
            max: max_nodes,
        });
    }
    let mut warnings = Vec::new();
    if !grammar.is_monotone() {
        let names: Vec<&str> = grammar
            .rules()
            .iter()
            .filter(|r| !r.is_monotone())
            .map(Rule::name)
            .collect();
        warnings.push(format!(
            "grammar is not monotone (rules {}); node-count pruning may miss members",
            names.join(", ")
        ));
    }

    let mut seen: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut found: Vec<TypedGraph> = Vec::new();
    let mut queue = VecDeque::new();
    insert_new(start.clone(), &mut seen, &mut found, &mut queue);
    while let Some(i) = queue.pop_front() {
        let g = found[i].clone();
        for rule in grammar.rules() {
            for m in find_matches(rule, &g, None)? {
                let h = apply_rule(rule, &m, &g)?.result;
                if h.node_count() <= max_nodes {
                    insert_new(h, &mut seen, &mut found, &mut queue);
                }
            }
        }
    }

    let mut keyed: Vec<((usize, usize, CanonicalCode), TypedGraph)> = found
        .into_iter()
        .map(|g| ((g.node_count(), g.edge_count(), canonical_form(&g).code), g))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Language {
        members: keyed.into_iter().map(|(_, g)| g).collect(),
        warnings,
    })
}

fn insert_new(
    g: TypedGraph,
    seen: &mut BTreeMap<u64, Vec<usize>>,
    found: &mut Vec<TypedGraph>,
    queue: &mut VecDeque<usize>,
) {
    let bucket = seen.entry(invariant_hash(&g)).or_default();
    if bucket
        .iter()
        .any(|&i| matches!(find_isomorphism(&found[i], &g), Ok(Some(_))))
    {
        return;
    }
    bucket.push(found.len());
    queue.push_back(found.len());
    found.push(g);
}
