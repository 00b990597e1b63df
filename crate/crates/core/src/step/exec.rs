use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::semantics::*;
use super::state::{cf_variable_node, template_node, ExecState, StateDoc};
use super::trace::{MatchEntry, StepOutcome, StepRecord, Trace};
use super::{MatchOrder, Status, Strategy};
use crate::error::{ExecError, RuleError};
use crate::graph::{NodeId, TypedGraph};
use crate::model::{StoryDiagram, VarId};
use crate::spo::{apply_rule, find_matches, ApplyResult, Match, PartialAssignment, Rule};
use crate::syntax::{Branch, NodeClass, STOP_NODE};

/// What invoking the pattern at the token's node did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternInvocationResult {
    Matched(MatchedInvocation),
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchedInvocation {
    /// Left-hand side variable name to model node.
    pub matched: BTreeMap<String, NodeId>,
    /// Variables that become bound, with their new values.
    pub constructed: BTreeMap<VarId, NodeId>,
    /// Variables whose binding goes away.
    pub destructed: BTreeSet<VarId>,
}

/// Serialized view of a [`Configuration`] without its model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationDoc {
    #[serde(flatten)]
    pub status: Status,
    pub steps: usize,
    pub model_rev: u64,
    pub strategy: Strategy,
    pub state: StateDoc,
}

/// State, model and everything needed to take the next step.
#[derive(Clone, Debug)]
pub struct Configuration {
    diagram: Arc<StoryDiagram>,
    state: ExecState,
    model: TypedGraph,
    strategy: Strategy,
    order: MatchOrder,
    rng: Option<ChaCha8Rng>,
    status: Status,
    steps: usize,
    model_rev: u64,
    cf_vars: BTreeMap<NodeId, VarId>,
    reverse_updates: bool,
}

impl Configuration {
    /// Creates the root scope instance, puts the token on the node after the
    /// start node and binds `this` to `this_node`.
    pub fn initialize(
        diagram: Arc<StoryDiagram>,
        model: TypedGraph,
        this_node: &str,
        strategy: Strategy,
        order: MatchOrder,
    ) -> Result<Self, ExecError> {
        let param = diagram
            .params()
            .first()
            .cloned()
            .ok_or_else(|| ExecError::BadThis("diagram has no parameter".into()))?;
        let ty = model
            .node_type(this_node)
            .ok_or_else(|| ExecError::BadThis(format!("no model node `{this_node}`")))?;
        if !model.typegraph().conforms(ty, &param.ty) {
            return Err(ExecError::BadThis(format!(
                "`{this_node}` has type `{ty}`, expected `{}`",
                param.ty
            )));
        }
        let cf_vars = (0..diagram.scopes().variables().len())
            .map(|i| (cf_variable_node(&diagram, VarId(i)), VarId(i)))
            .collect();
        let rng = match order {
            MatchOrder::Lex => None,
            MatchOrder::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let mut c = Configuration {
            state: ExecState::from_diagram(&diagram),
            model,
            strategy,
            order,
            rng,
            status: Status::Running,
            steps: 0,
            model_rev: 0,
            cf_vars,
            reverse_updates: false,
            diagram,
        };
        let start = c.diagram.cfg().start_node().clone();
        let root = template_node(&scopes_root_id(&c.diagram));
        let init = c
            .apply_first(&semantic_rules().init, &[("s", &start), ("r", &root)])?
            .ok_or_else(|| ExecError::Internal("initialization rule not applicable".into()))?;
        let instance = init.rhs_match.nodes[&NodeId::from("i")].clone();
        let scopes = c.diagram.scopes();
        let this_var = scopes
            .resolve_in(scopes.root(), &param.name)
            .ok_or_else(|| ExecError::Internal("parameter is not declared".into()))?;
        let x = cf_variable_node(&c.diagram, this_var);
        c.bind(&instance, &x, &NodeId::from(this_node))?;
        Ok(c)
    }

    pub fn diagram(&self) -> &Arc<StoryDiagram> {
        &self.diagram
    }

    pub fn state(&self) -> &ExecState {
        &self.state
    }

    pub fn model(&self) -> &TypedGraph {
        &self.model
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn match_order(&self) -> MatchOrder {
        self.order
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Number of pattern applications that changed the model.
    pub fn model_rev(&self) -> u64 {
        self.model_rev
    }

    /// Status and state as one JSON document.
    pub fn to_state_json(&self) -> String {
        let doc = ConfigurationDoc {
            status: self.status.clone(),
            steps: self.steps,
            model_rev: self.model_rev,
            strategy: self.strategy,
            state: self.state.to_doc(),
        };
        serde_json::to_string_pretty(&doc).expect("configurations serialize")
    }

    /// Applies binding updates in reverse order. Results must not change.
    #[doc(hidden)]
    pub fn set_reverse_update_order(&mut self, reverse: bool) {
        self.reverse_updates = reverse;
    }

    /// The variable a `CFVariable` state node stands for.
    pub fn var_of(&self, cf_variable: &str) -> Option<VarId> {
        self.cf_vars.get(cf_variable).copied()
    }

    fn var_name(&self, v: VarId) -> String {
        self.diagram.scopes().variable(v).name.clone()
    }

    fn apply_first(&mut self, rule: &Rule, pre: &[(&str, &NodeId)]) -> Result<Option<ApplyResult>, ExecError> {
        let partial: PartialAssignment = pre.iter().map(|(l, h)| (NodeId::from(*l), (*h).clone())).collect();
        let Some(m) = find_matches(rule, &self.state.graph, Some(&partial))?.into_iter().next() else {
            return Ok(None);
        };
        let res = apply_rule(rule, &m, &self.state.graph)?;
        self.state.graph = res.result.clone();
        Ok(Some(res))
    }

    /// Applies `rule` as long as possible; returns the matches used, as
    /// seen before each application.
    fn apply_all(&mut self, rule: &Rule, pre: &[(&str, &NodeId)]) -> Result<Vec<Match>, ExecError> {
        let partial: PartialAssignment = pre.iter().map(|(l, h)| (NodeId::from(*l), (*h).clone())).collect();
        let mut used = Vec::new();
        while let Some(m) = find_matches(rule, &self.state.graph, Some(&partial))?.into_iter().next() {
            self.state.graph = apply_rule(rule, &m, &self.state.graph)?.result;
            used.push(m);
        }
        Ok(used)
    }

    fn bind(&mut self, instance: &NodeId, x: &NodeId, model_node: &NodeId) -> Result<(), ExecError> {
        let r = semantic_rules();
        self.apply_all(&r.unbind, &[("i", instance), ("x", x)])?;
        let val = match self.state.variable_for(model_node) {
            Some(v) => v.clone(),
            None => {
                let res = self
                    .apply_first(&r.new_variable, &[])?
                    .expect("creating a variable is always possible");
                let val = res.rhs_match.nodes[&NodeId::from("val")].clone();
                self.state.values.insert(val.clone(), Some(model_node.clone()));
                val
            }
        };
        self.apply_first(&r.bind, &[("i", instance), ("x", x), ("val", &val)])?
            .ok_or_else(|| ExecError::Internal("binding rule not applicable".into()))?;
        Ok(())
    }

    fn collect_variables(&mut self) -> Result<(), ExecError> {
        for m in self.apply_all(&semantic_rules().collect_variable, &[])? {
            let val = m.node("val").expect("rule node");
            self.state.values.remove(val);
        }
        Ok(())
    }

    /// Matches the pattern at the token's node, applies it to the model and
    /// records the invocation in the state.
    ///
    /// Every left-hand side variable with a binding in the current instance
    /// is pre-matched to its value, bound-marked or not. A binding whose
    /// model node is gone makes the invocation fail.
    pub fn invoke_pattern(&mut self) -> Result<PatternInvocationResult, ExecError> {
        if self.status != Status::Running {
            return Err(ExecError::NotRunning);
        }
        let node = self.state.token_node().cloned().ok_or_else(|| ExecError::Internal("token is detached".into()))?;
        let inst = self
            .state
            .current_instance()
            .cloned()
            .ok_or_else(|| ExecError::Internal("token has no scope instance".into()))?;
        let d = self.diagram.clone();
        let pat = d
            .pattern(node.as_str())
            .ok_or_else(|| ExecError::Internal(format!("no pattern at `{node}`")))?;
        let scopes = d.scopes();
        let resolve = |name: &str| {
            scopes
                .resolve(node.as_str(), name)
                .ok_or_else(|| ExecError::Internal(format!("`{name}` is undeclared at `{node}`")))
        };
        let bindings: BTreeMap<NodeId, Option<NodeId>> = self
            .state
            .bindings_of(inst.as_str())
            .into_iter()
            .map(|b| (b.cf_variable, b.model_node))
            .collect();

        let mut partial = PartialAssignment::new();
        for (l, name) in pat.lhs_vars() {
            let x = cf_variable_node(&d, resolve(name)?);
            match bindings.get(&x) {
                Some(Some(m)) => {
                    partial.insert(l.clone(), m.clone());
                }
                Some(None) => return Ok(PatternInvocationResult::Failed),
                None if pat.is_bound(name) => {
                    return Err(ExecError::Internal(format!("bound variable `{name}` has no binding at `{node}`")))
                }
                None => {}
            }
        }
        let matches = match find_matches(pat.rule(), &self.model, Some(&partial)) {
            Ok(ms) => ms,
            Err(RuleError::InvalidPartial(_)) => return Ok(PatternInvocationResult::Failed),
            Err(e) => return Err(e.into()),
        };
        let Some(chosen) = self.choose(matches) else {
            return Ok(PatternInvocationResult::Failed);
        };
        let res = apply_rule(pat.rule(), &chosen, &self.model)?;
        if !res.created.is_empty() || !res.deleted.is_empty() {
            self.model_rev += 1;
        }
        self.model = res.result;
        for n in &res.deleted.nodes {
            for v in self.state.values.values_mut() {
                if v.as_ref() == Some(n) {
                    *v = None;
                }
            }
        }

        let mut matched = BTreeMap::new();
        let mut constructed = BTreeMap::new();
        for (l, name) in pat.lhs_vars() {
            let m = chosen.node(l.as_str()).expect("matches are total").clone();
            if !partial.contains_key(l) {
                constructed.insert(resolve(name)?, m.clone());
            }
            matched.insert(name.to_owned(), m);
        }
        for (r, name) in pat.created_vars() {
            constructed.insert(resolve(name)?, res.rhs_match.nodes[r].clone());
        }
        let mut destructed: BTreeSet<VarId> = pat.deleted_vars().map(resolve).collect::<Result<_, _>>()?;
        for (x, value) in &bindings {
            if value.as_ref().is_some_and(|m| res.deleted.nodes.contains(m)) {
                destructed.extend(self.var_of(x.as_str()));
            }
        }
        constructed.retain(|v, _| !destructed.contains(v));

        let r = semantic_rules();
        self.apply_all(&r.clear_invocation, &[("n", &node)])?;
        let rec = self
            .apply_first(&r.record_invocation, &[("n", &node)])?
            .ok_or_else(|| ExecError::Internal("invocation not recordable".into()))?;
        let p = rec.rhs_match.nodes[&NodeId::from("p")].clone();
        for v in constructed.keys() {
            let x = cf_variable_node(&d, *v);
            self.apply_first(&r.mark_constructed, &[("p", &p), ("x", &x)])?;
        }
        for v in &destructed {
            let x = cf_variable_node(&d, *v);
            self.apply_first(&r.mark_destructed, &[("p", &p), ("x", &x)])?;
        }
        Ok(PatternInvocationResult::Matched(MatchedInvocation {
            matched,
            constructed,
            destructed,
        }))
    }

    /// First match, or in random mode a uniformly chosen node assignment
    /// with its first edge assignment.
    fn choose(&mut self, matches: Vec<Match>) -> Option<Match> {
        match self.rng.as_mut() {
            None => matches.into_iter().next(),
            Some(rng) => {
                let mut distinct: Vec<Match> = Vec::new();
                for m in matches {
                    if distinct.last().is_none_or(|p| p.morphism().nodes != m.morphism().nodes) {
                        distinct.push(m);
                    }
                }
                if distinct.is_empty() {
                    return None;
                }
                let i = rng.random_range(0..distinct.len());
                Some(distinct.swap_remove(i))
            }
        }
    }

    fn update_bindings(&mut self, instance: &NodeId, inv: &MatchedInvocation) -> Result<(), ExecError> {
        enum Update<'a> {
            Unbind(VarId),
            Bind(VarId, &'a NodeId),
        }
        let mut updates: Vec<Update> = inv
            .destructed
            .iter()
            .map(|v| Update::Unbind(*v))
            .chain(inv.constructed.iter().map(|(v, m)| Update::Bind(*v, m)))
            .collect();
        if self.reverse_updates {
            updates.reverse();
        }
        for u in updates {
            match u {
                Update::Unbind(v) => {
                    let x = cf_variable_node(&self.diagram, v);
                    self.apply_all(&semantic_rules().unbind, &[("i", instance), ("x", &x)])?;
                }
                Update::Bind(v, m) => {
                    let x = cf_variable_node(&self.diagram, v);
                    self.bind(instance, &x, m)?;
                }
            }
        }
        self.collect_variables()
    }

    /// One semantic step: invoke the pattern at the token, then move the
    /// token, update bindings and leave finished scopes according to the
    /// node's class. A token on a stop node ends the run.
    pub fn step(&mut self) -> Result<StepRecord, ExecError> {
        if self.status != Status::Running {
            return Err(ExecError::NotRunning);
        }
        self.steps += 1;
        let node = self.state.token_node().cloned().ok_or_else(|| ExecError::Internal("token is detached".into()))?;
        let mut record = StepRecord {
            step: self.steps,
            node: node.to_string(),
            outcome: StepOutcome::Terminated,
            matched: Vec::new(),
            constructed: Vec::new(),
            destructed: Vec::new(),
            scope_events: Vec::new(),
            model_rev: self.model_rev,
        };
        if self.state.graph.node_type(node.as_str()) == Some(STOP_NODE) {
            self.status = Status::Terminated;
            return Ok(record);
        }
        let class = self
            .diagram
            .cfg()
            .classification()
            .get(node.as_str())
            .cloned()
            .ok_or_else(|| ExecError::Internal(format!("`{node}` is not a story node")))?;
        let inst = self.state.current_instance().cloned().expect("running states have an instance");
        let token = self.state.token().cloned().expect("running states have a token");
        let result = self.invoke_pattern()?;
        let r = semantic_rules();
        match (&class, &result) {
            (NodeClass::Sequential, PatternInvocationResult::Matched(inv)) => {
                self.apply_first(&r.shift_next, &[("t", &token), ("n", &node)])?;
                self.update_bindings(&inst, inv)?;
            }
            (NodeClass::Sequential, PatternInvocationResult::Failed) => {
                self.apply_first(&r.untoken, &[("t", &token), ("n", &node)])?;
                self.status = Status::Error { node: node.clone() };
            }
            (_, result) => {
                let b = match result {
                    PatternInvocationResult::Matched(_) => Branch::Success,
                    PatternInvocationResult::Failed => Branch::Failure,
                };
                let (enter, shift) = match b {
                    Branch::Success => (&r.enter_success, &r.shift_success),
                    Branch::Failure => (&r.enter_failure, &r.shift_failure),
                };
                let res = self
                    .apply_first(enter, &[("t", &token), ("n", &node), ("i", &inst)])?
                    .ok_or_else(|| ExecError::Internal(format!("no {b} scope at `{node}`")))?;
                let child = res.rhs_match.nodes[&NodeId::from("c")].clone();
                record.scope_events.push(format!("enter {node}.{b}"));
                self.apply_all(&r.copy_binding, &[("c", &child), ("i", &inst)])?;
                if let PatternInvocationResult::Matched(inv) = result {
                    self.update_bindings(&child, inv)?;
                }
                self.apply_first(shift, &[("t", &token), ("n", &node)])?;
            }
        }
        if self.status == Status::Running {
            self.leave_scopes(&token, &mut record.scope_events)?;
        }
        record.model_rev = self.model_rev;
        match result {
            PatternInvocationResult::Matched(inv) => {
                record.outcome = StepOutcome::Matched;
                record.matched = inv
                    .matched
                    .into_iter()
                    .map(|(var, n)| MatchEntry {
                        var,
                        model_node: n.to_string(),
                    })
                    .collect();
                record.constructed = inv.constructed.keys().map(|v| self.var_name(*v)).collect();
                record.destructed = inv.destructed.iter().map(|v| self.var_name(*v)).collect();
            }
            PatternInvocationResult::Failed => record.outcome = StepOutcome::Failed,
        }
        Ok(record)
    }

    /// Leaves scope instances while the token's node lies outside the
    /// current instance's scope, applying the join policy at each level.
    fn leave_scopes(&mut self, token: &NodeId, events: &mut Vec<String>) -> Result<(), ExecError> {
        let r = semantic_rules();
        loop {
            let partial = PartialAssignment::from([(NodeId::from("t"), token.clone())]);
            let Some(m) = find_matches(&r.must_exit, &self.state.graph, Some(&partial))?.into_iter().next() else {
                return Ok(());
            };
            let child = m.node("c").expect("rule node").clone();
            let parent = m.node("i").expect("rule node").clone();
            let scope = m.node("s").expect("rule node").to_string();
            events.push(format!("exit {}", scope.strip_prefix("tpl:").unwrap_or(&scope)));
            let pre = [("c", &child), ("i", &parent)];
            let key = |m: &Match| {
                let x = m.node("x").expect("rule node").to_string();
                x.strip_prefix("cfv:").unwrap_or(&x).to_owned()
            };
            match self.strategy {
                Strategy::Conservative => {
                    for m in self.apply_all(&r.invalidate, &pre)? {
                        events.push(format!("invalidate {}", key(&m)));
                    }
                }
                Strategy::Optimistic => {
                    for m in self.apply_all(&r.overwrite, &pre)? {
                        events.push(format!("overwrite {}", key(&m)));
                    }
                    for m in self.apply_all(&r.propagate, &pre)? {
                        events.push(format!("propagate {}", key(&m)));
                    }
                }
            }
            self.apply_all(&r.discard_binding, &[("c", &child)])?;
            self.apply_first(&r.exit, &[("t", token), ("c", &child), ("i", &parent)])?
                .ok_or_else(|| ExecError::Internal("exit rule not applicable".into()))?;
            self.collect_variables()?;
        }
    }

    /// Steps until the run ends or `max_steps` steps have been taken; a run
    /// still going after that is marked nonterminating.
    pub fn run(&mut self, max_steps: usize) -> Result<Trace, ExecError> {
        let mut trace = Trace::default();
        while self.status == Status::Running && trace.records.len() < max_steps {
            trace.records.push(self.step()?);
        }
        if self.status == Status::Running {
            self.status = Status::Nonterminating;
        }
        Ok(trace)
    }
}

fn scopes_root_id(d: &StoryDiagram) -> String {
    let s = d.scopes();
    s.template(s.root()).id.clone()
}
