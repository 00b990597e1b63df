//! Set semantics by brute force: every story node denotes the set of
//! input/output graph pairs of its rule, composed along the control flow.
//!
//! Bindings play no part here. Patterns are matched anywhere in the graph,
//! so the sets over-approximate what a run with bound variables can do.

use std::fmt;

use serde::Serialize;

use crate::error::OracleError;
use crate::graph::{are_isomorphic, NodeId, TypedGraph};
use crate::model::StoryDiagram;
use crate::spo::{apply_rule, find_matches, Rule};
use crate::step::{replay, StepOutcome, Trace};
use crate::syntax::{Branch, NodeClass, FAILURE, NEXT, STOP_NODE, SUCCESS};

/// Models above this many nodes are refused.
pub const DEFAULT_SIZE_BOUND: usize = 6;
/// Loop iterations explored along one path.
pub const DEFAULT_LOOP_BOUND: usize = 16;

/// Pairs `(input, output)` for one input graph, outputs distinct up to
/// isomorphism. `complete` is false when a bound cut the exploration.
#[derive(Clone, Debug)]
pub struct SemSet {
    input: TypedGraph,
    outputs: Vec<TypedGraph>,
    complete: bool,
}

impl SemSet {
    pub fn empty(input: TypedGraph) -> Self {
        SemSet {
            input,
            outputs: Vec::new(),
            complete: true,
        }
    }

    /// `{(G, G)}`.
    pub fn identity(g: &TypedGraph) -> Self {
        SemSet {
            input: g.clone(),
            outputs: vec![g.clone()],
            complete: true,
        }
    }

    pub fn input(&self) -> &TypedGraph {
        &self.input
    }

    pub fn outputs(&self) -> &[TypedGraph] {
        &self.outputs
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&TypedGraph, &TypedGraph)> {
        self.outputs.iter().map(move |h| (&self.input, h))
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Adds `h` unless an isomorphic output is present.
    pub fn insert(&mut self, h: TypedGraph) -> bool {
        if self.contains_output(&h) {
            return false;
        }
        self.outputs.push(h);
        true
    }

    pub fn contains_output(&self, h: &TypedGraph) -> bool {
        self.outputs.iter().any(|o| are_isomorphic(o, h))
    }

    pub fn contains(&self, g: &TypedGraph, h: &TypedGraph) -> bool {
        are_isomorphic(&self.input, g) && self.contains_output(h)
    }

    fn absorb(&mut self, other: SemSet) {
        self.complete &= other.complete;
        for h in other.outputs {
            self.insert(h);
        }
    }
}

fn applicable(r: &Rule, g: &TypedGraph) -> bool {
    find_matches(r, g, None).is_ok_and(|ms| !ms.is_empty())
}

/// One pair per match; `{(G, G)}` if the rule does not apply.
pub fn sem_node(r: &Rule, g: &TypedGraph) -> SemSet {
    let matches = find_matches(r, g, None).unwrap_or_default();
    if matches.is_empty() {
        return SemSet::identity(g);
    }
    let mut out = SemSet::empty(g.clone());
    for m in &matches {
        let h = apply_rule(r, m, g).expect("fresh matches apply").result;
        out.insert(h);
    }
    out
}

/// Relational composition of the rules' sets, left to right. The empty
/// sequence denotes the identity.
pub fn sem_seq(rules: &[&Rule], g: &TypedGraph) -> SemSet {
    let mut out = SemSet::identity(g);
    for r in rules {
        let mut next = SemSet::empty(g.clone());
        for h in &out.outputs {
            next.absorb(sem_node(r, h));
        }
        next.complete &= out.complete;
        out = next;
    }
    out
}

/// `Sem(r1; r2)` if `r1` applies to `g`, else `Sem(r1; r3)`.
pub fn sem_if(r1: &Rule, r2: &Rule, r3: &Rule, g: &TypedGraph) -> SemSet {
    if applicable(r1, g) {
        sem_seq(&[r1, r2], g)
    } else {
        sem_seq(&[r1, r3], g)
    }
}

/// `Sem(r1; r2; while)` if `r1` applies, else `Sem(r1)`, unrolled at most
/// `depth` times.
pub fn sem_while(r1: &Rule, r2: &Rule, g: &TypedGraph, depth: usize) -> SemSet {
    if !applicable(r1, g) {
        return sem_node(r1, g);
    }
    let mut out = SemSet::empty(g.clone());
    if depth == 0 {
        out.complete = false;
        return out;
    }
    for h in sem_seq(&[r1, r2], g).outputs {
        let rest = sem_while(r1, r2, &h, depth - 1);
        out.complete &= rest.complete;
        for o in rest.outputs {
            out.insert(o);
        }
    }
    out
}

/// The set of the whole diagram for input `g`, following the control flow
/// from the start node. Conditionals choose their branch by whether the
/// pattern applies anywhere in the graph.
pub fn sem_diagram(d: &StoryDiagram, g: &TypedGraph, loop_bound: usize) -> Result<SemSet, OracleError> {
    let mut out = SemSet::empty(g.clone());
    let first = target(d, d.cfg().start_node(), NEXT);
    eval(d, &first, g, loop_bound, &mut out)?;
    Ok(out)
}

fn target(d: &StoryDiagram, n: &NodeId, ty: &str) -> NodeId {
    d.cfg()
        .graph()
        .successors(n.as_str(), ty)
        .next()
        .expect("valid control flow")
        .clone()
}

fn eval(d: &StoryDiagram, n: &NodeId, g: &TypedGraph, fuel: usize, out: &mut SemSet) -> Result<(), OracleError> {
    if d.cfg().graph().node_type(n.as_str()) == Some(STOP_NODE) {
        out.insert(g.clone());
        return Ok(());
    }
    let rule = d.pattern(n.as_str()).expect("story nodes have patterns").rule();
    let class = d.cfg().classification().get(n.as_str()).expect("classified");
    let (succ, fuel) = match class {
        NodeClass::Sequential => (target(d, n, NEXT), fuel),
        NodeClass::LoopHead { body } if *body == Branch::Failure => {
            return Err(OracleError::Unsupported(format!(
                "loop at `{n}` repeats along its failure branch"
            )));
        }
        NodeClass::LoopHead { body } => {
            if !applicable(rule, g) {
                return eval(d, &target(d, n, body.other().edge_type()), g, fuel, out);
            }
            if fuel == 0 {
                out.complete = false;
                return Ok(());
            }
            (target(d, n, body.edge_type()), fuel - 1)
        }
        NodeClass::ConditionalJoining { .. } | NodeClass::ConditionalNonjoining { .. } => {
            if !applicable(rule, g) {
                return eval(d, &target(d, n, FAILURE), g, fuel, out);
            }
            (target(d, n, SUCCESS), fuel)
        }
    };
    for h in sem_node(rule, g).outputs {
        eval(d, &succ, &h, fuel, out)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "note", rename_all = "kebab-case")]
pub enum Verdict {
    /// The run's pair is in the set.
    Agree(String),
    /// The semantics differ here by design.
    DocumentedDivergence(String),
    /// A bound cut the set short and the pair was not found.
    Inconclusive(String),
    Disagree(String),
}

impl Verdict {
    pub fn is_disagreement(&self) -> bool {
        matches!(self, Verdict::Disagree(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Agree(n) => write!(f, "agree: {n}"),
            Verdict::DocumentedDivergence(n) => write!(f, "documented divergence: {n}"),
            Verdict::Inconclusive(n) => write!(f, "inconclusive: {n}"),
            Verdict::Disagree(n) => write!(f, "disagree: {n}"),
        }
    }
}

/// Outcome of comparing one run with the set semantics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub verdict: Verdict,
    /// One line per executed story node.
    pub notes: Vec<String>,
    pub outputs: usize,
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub size_bound: usize,
    pub loop_bound: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            size_bound: DEFAULT_SIZE_BOUND,
            loop_bound: DEFAULT_LOOP_BOUND,
        }
    }
}

/// Replays `trace` on `model` and checks the resulting pair against the
/// set of the diagram.
///
/// A run that stopped with a pattern failure is a documented divergence:
/// the set semantics passes through failed nodes. Its prefix is still
/// checked. A terminated run outside the set is a documented divergence if
/// some branch went the other way than unanchored applicability says, and a
/// disagreement otherwise.
pub fn cross_check(
    d: &StoryDiagram,
    model: &TypedGraph,
    this_node: &str,
    trace: &Trace,
    opts: OracleOptions,
) -> Result<CrossCheck, OracleError> {
    if model.node_count() > opts.size_bound {
        return Err(OracleError::Oversized {
            nodes: model.node_count(),
            bound: opts.size_bound,
        });
    }
    if !model.has_node(this_node) {
        return Err(OracleError::Replay(format!("no model node `{this_node}`")));
    }
    let final_model = replay(d, model, trace).map_err(OracleError::Replay)?;

    let mut notes = Vec::new();
    let mut branch_mismatch = None;
    let mut path_set = SemSet::identity(model);
    let mut current = model.clone();
    for rec in &trace.records {
        if rec.outcome == StepOutcome::Terminated {
            notes.push(format!("{}: stop", rec.node));
            continue;
        }
        let rule = d
            .pattern(&rec.node)
            .ok_or_else(|| OracleError::Replay(format!("no pattern at `{}`", rec.node)))?
            .rule();
        let class = d.cfg().classification().get(&rec.node).expect("story node");
        let free = applicable(rule, &current);
        let taken = rec.outcome == StepOutcome::Matched;
        notes.push(format!(
            "{} ({class}): step {}, pattern {} unanchored",
            rec.node,
            if taken { "matched" } else { "failed" },
            if free { "applies" } else { "does not apply" }
        ));
        if class.is_conditional() && taken != free && branch_mismatch.is_none() {
            branch_mismatch = Some(rec.node.clone());
        }
        let mut next = SemSet::empty(model.clone());
        for h in &path_set.outputs {
            next.absorb(if taken { sem_node(rule, h) } else { SemSet::identity(h) });
        }
        path_set = next;
        if taken {
            current = replay(
                d,
                &current,
                &Trace {
                    records: vec![rec.clone()],
                },
            )
            .map_err(OracleError::Replay)?;
        }
    }

    let last = trace.records.last();
    let failed_at = last
        .filter(|r| r.outcome == StepOutcome::Failed)
        .filter(|r| d.cfg().classification().get(&r.node).is_some_and(|c| !c.is_conditional()))
        .map(|r| r.node.clone());
    if let Some(node) = failed_at {
        let verdict = if path_set.contains_output(&final_model) {
            Verdict::DocumentedDivergence(format!(
                "denotational semantics passes through the failed node `{node}`, step semantics stops with an error; the executed prefix agrees"
            ))
        } else {
            Verdict::Disagree(format!("model before the failure at `{node}` is not reachable along the executed prefix"))
        };
        return Ok(CrossCheck {
            verdict,
            notes,
            outputs: path_set.len(),
            complete: true,
        });
    }
    if last.is_none_or(|r| r.outcome != StepOutcome::Terminated) {
        return Ok(CrossCheck {
            verdict: Verdict::Inconclusive("the run did not terminate".into()),
            notes,
            outputs: 0,
            complete: false,
        });
    }

    let sem = sem_diagram(d, model, opts.loop_bound)?;
    let verdict = if sem.contains(model, &final_model) {
        Verdict::Agree("pair ∈ Sem".into())
    } else if let Some(node) = branch_mismatch {
        Verdict::DocumentedDivergence(format!(
            "branch at `{node}` depends on bindings: the bound pattern and the unanchored pattern disagree on applicability"
        ))
    } else if !sem.is_complete() {
        Verdict::Inconclusive("pair not found within the loop bound".into())
    } else {
        Verdict::Disagree("pair ∉ Sem".into())
    };
    Ok(CrossCheck {
        verdict,
        notes,
        outputs: sem.len(),
        complete: sem.is_complete(),
    })
}
