use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, TypedGraph};
use crate::model::StoryDiagram;
use crate::spo::{apply_rule, find_matches, PartialAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepOutcome {
    Matched,
    Failed,
    Terminated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub var: String,
    pub model_node: String,
}

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub node: String,
    pub outcome: StepOutcome,
    /// Left-hand side variables and the model nodes they matched.
    #[serde(rename = "match")]
    pub matched: Vec<MatchEntry>,
    pub constructed: Vec<String>,
    pub destructed: Vec<String>,
    pub scope_events: Vec<String>,
    /// Model revision after the step.
    pub model_rev: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<StepRecord>,
}

impl Trace {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Trace { records })
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// Re-applies the recorded matches to `initial`, in order. Each record fixes
/// the node assignment; the first edge assignment completes it, as during
/// the run.
pub fn replay(d: &StoryDiagram, initial: &TypedGraph, trace: &Trace) -> Result<TypedGraph, String> {
    let mut g = initial.clone();
    for rec in trace.records.iter().filter(|r| r.outcome == StepOutcome::Matched) {
        let pat = d
            .pattern(&rec.node)
            .ok_or_else(|| format!("step {}: no pattern at `{}`", rec.step, rec.node))?;
        let mut partial = PartialAssignment::new();
        for (l, name) in pat.lhs_vars() {
            let entry = rec
                .matched
                .iter()
                .find(|e| e.var == name)
                .ok_or_else(|| format!("step {}: `{name}` not recorded", rec.step))?;
            partial.insert(l.clone(), NodeId::from(&entry.model_node));
        }
        let m = find_matches(pat.rule(), &g, Some(&partial))
            .map_err(|e| format!("step {}: {e}", rec.step))?
            .into_iter()
            .next()
            .ok_or_else(|| format!("step {}: recorded match no longer applies", rec.step))?;
        g = apply_rule(pat.rule(), &m, &g)
            .map_err(|e| format!("step {}: {e}", rec.step))?
            .result;
    }
    Ok(g)
}
