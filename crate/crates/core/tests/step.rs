mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use common::fixture;
use sdm::graph::{are_isomorphic, TypedGraph};
use sdm::model::{load_model, load_story_diagram, StoryDiagram};
use sdm::step::{
    replay, Configuration, MatchOrder, Status, StepOutcome, Strategy, Trace, AT, OWNER, POSITION_TOKEN,
    SCOPE_INSTANCE, VARIABLE_BINDING,
};
use sdm::ExecError;

struct Run {
    config: Configuration,
    trace: Trace,
    initial: TypedGraph,
    diagram: Arc<StoryDiagram>,
}

fn setup(diagram: &str, model: &str, this: &str, strategy: Strategy, order: MatchOrder) -> (Configuration, TypedGraph) {
    let d = Arc::new(load_story_diagram(&fixture(&format!("{diagram}.json"))).unwrap());
    let m = load_model(&fixture(&format!("{model}.json")), &d).unwrap();
    let c = Configuration::initialize(d, m.clone(), this, strategy, order).unwrap();
    (c, m)
}

fn run_with(diagram: &str, model: &str, this: &str, strategy: Strategy, order: MatchOrder) -> Run {
    let (mut config, initial) = setup(diagram, model, this, strategy, order);
    let trace = config.run(200).unwrap();
    let diagram = config.diagram().clone();
    Run {
        config,
        trace,
        initial,
        diagram,
    }
}

fn run(diagram: &str, model: &str, this: &str) -> Run {
    run_with(diagram, model, this, Strategy::Conservative, MatchOrder::Lex)
}

/// Structural invariants that must hold after every step.
fn check_state(c: &Configuration) {
    let s = c.state();
    let g = s.graph();
    let running = *c.status() == Status::Running;
    let attached = s.token().is_some_and(|t| g.successors(t.as_str(), AT).count() == 1);
    match c.status() {
        Status::Running | Status::Terminated | Status::Nonterminating => {
            assert_eq!(s.token_count(), 1);
            assert!(attached);
        }
        Status::Error { .. } => assert!(!attached),
    }
    let instances: BTreeSet<_> = g.nodes_of_type(SCOPE_INSTANCE).cloned().collect();
    if running {
        let chain: BTreeSet<_> = s.active_chain().into_iter().collect();
        assert_eq!(chain, instances, "scope instances outside the active chain");
    }
    for b in g.nodes_of_type(VARIABLE_BINDING) {
        let owners: Vec<_> = g.successors(b.as_str(), OWNER).collect();
        assert_eq!(owners.len(), 1, "binding `{b}` has no single owner");
        assert!(instances.contains(owners[0]));
    }
    assert_eq!(s.bindings().len(), g.nodes_of_type(VARIABLE_BINDING).count());
    for i in &instances {
        let mut vars: Vec<_> = s.bindings_of(i.as_str()).into_iter().map(|b| b.cf_variable).collect();
        let n = vars.len();
        vars.sort();
        vars.dedup();
        assert_eq!(vars.len(), n, "instance `{i}` binds a variable twice");
    }
    for b in s.bindings() {
        if let Some(m) = &b.model_node {
            assert!(c.model().has_node(m.as_str()), "binding to deleted `{m}`");
        }
    }
}

fn stepwise(diagram: &str, model: &str, this: &str, strategy: Strategy) -> Configuration {
    let (mut c, _) = setup(diagram, model, this, strategy, MatchOrder::Lex);
    check_state(&c);
    while *c.status() == Status::Running {
        c.step().unwrap();
        check_state(&c);
    }
    c
}

/// Bindings as (template of the owning instance, variable, model node).
fn binding_summary(c: &Configuration) -> Vec<(String, String, Option<String>)> {
    let s = c.state();
    let mut v: Vec<_> = s
        .bindings()
        .into_iter()
        .map(|b| {
            let tpl = s.instance_template(b.instance.as_str()).unwrap().to_string();
            (tpl, b.cf_variable.to_string(), b.model_node.map(|m| m.to_string()))
        })
        .collect();
    v.sort();
    v
}

fn has_next(g: &TypedGraph, n: &str) -> bool {
    g.successors(n, "next").next().is_some()
}

#[test]
fn minimal_diagram_terminates() {
    let r = run("minimal", "list1", "i1");
    assert_eq!(*r.config.status(), Status::Terminated);
    assert_eq!(r.trace.records.len(), 2);
    assert_eq!(r.trace.last().unwrap().outcome, StepOutcome::Terminated);
    assert_eq!(r.config.model(), &r.initial);
}

#[test]
fn delete_next_object_on_short_and_long_lists() {
    for k in 1..=5 {
        let r = run("delete_next_object", &format!("list{k}"), "i1");
        assert_eq!(*r.config.status(), Status::Terminated, "length {k}");
        let out = r.config.model();
        assert!(has_next(out, "i1"), "length {k}: this is the last one");
        let first = &r.trace.records[0];
        assert_eq!(first.node, "c1");
        let replayed = replay(&r.diagram, &r.initial, &r.trace).unwrap();
        assert_eq!(&replayed, out);
        if k >= 3 {
            assert_eq!(first.outcome, StepOutcome::Matched);
            assert_eq!(out.node_count(), k - 1);
            assert!(!out.has_node("i2"));
            assert_eq!(out.successors("i1", "next").next().unwrap().as_str(), "i3");
        } else {
            assert_eq!(first.outcome, StepOutcome::Failed);
            assert_eq!(out.node_count(), 2);
            let follower = out.successors("i1", "next").next().unwrap();
            assert_eq!(follower.as_str(), "n#1");
            let visited: Vec<&str> = r.trace.records.iter().map(|x| x.node.as_str()).collect();
            let via = if k == 1 { "y" } else { "d" };
            assert!(visited.contains(&via) && visited.contains(&"j"));
        }
    }
}

#[test]
fn sequential_failure_detaches_the_token() {
    let c = stepwise("seq_fail", "list1", "i1", Strategy::Conservative);
    assert_eq!(*c.status(), Status::Error { node: "n2".into() });
    assert_eq!(c.status().to_string(), "error at `n2`");
    assert!(c.state().token_node().is_none());
    let doc: serde_json::Value = serde_json::from_str(&c.to_state_json()).unwrap();
    assert_eq!(doc["status"], "error");
    assert_eq!(doc["node"], "n2");
    let edges = doc["state"]["graph"]["edges"].as_array().unwrap();
    assert!(edges.iter().all(|e| e["type"] != AT));
    let nodes = doc["state"]["graph"]["nodes"].as_array().unwrap();
    assert_eq!(nodes.iter().filter(|n| n["type"] == POSITION_TOKEN).count(), 1);
}

#[test]
fn stepping_a_finished_run_is_refused() {
    let mut c = stepwise("minimal", "list1", "i1", Strategy::Conservative);
    assert!(matches!(c.step(), Err(ExecError::NotRunning)));
}

#[test]
fn this_must_exist_and_conform() {
    let d = Arc::new(load_story_diagram(&fixture("minimal.json")).unwrap());
    let m = load_model(&fixture("list2.json"), &d).unwrap();
    let missing = Configuration::initialize(d.clone(), m, "zz", Strategy::Conservative, MatchOrder::Lex);
    assert!(matches!(missing, Err(ExecError::BadThis(_))));
    let w = Arc::new(load_story_diagram(&fixture("while_loop.json")).unwrap());
    let tasks = load_model(&fixture("tasks5.json"), &w).unwrap();
    let wrong = Configuration::initialize(w, tasks, "t1", Strategy::Conservative, MatchOrder::Lex);
    assert!(matches!(wrong, Err(ExecError::BadThis(_))));
}

#[test]
fn step_budget_marks_nontermination() {
    let (mut c, _) = setup("while_loop", "tasks5", "box", Strategy::Conservative, MatchOrder::Lex);
    let t = c.run(3).unwrap();
    assert_eq!(t.records.len(), 3);
    assert_eq!(*c.status(), Status::Nonterminating);
    assert!(c.step().is_err());
}

#[test]
fn invariants_hold_on_every_fixture() {
    let cases = [
        ("minimal", "list1", "i1"),
        ("delete_next_object", "list1", "i1"),
        ("delete_next_object", "list2", "i1"),
        ("delete_next_object", "list4", "i1"),
        ("seq_fail", "list1", "i1"),
        ("two_seq", "list3", "i1"),
        ("while_loop", "tasks5", "box"),
        ("join_policy", "list3", "i1"),
    ];
    for (d, m, this) in cases {
        for s in [Strategy::Conservative, Strategy::Optimistic] {
            stepwise(d, m, this, s);
        }
    }
}

#[test]
fn loop_bindings_are_fresh_each_iteration() {
    let (mut c, _) = setup("while_loop", "tasks5", "box", Strategy::Conservative, MatchOrder::Lex);
    let d = c.diagram().clone();
    let it = d.scopes().resolve("b", "it").unwrap();
    let key = format!("cfv:{}", d.scopes().variable_key(it));
    let mut iterations = 0;
    let mut picked = BTreeSet::new();
    while *c.status() == Status::Running {
        let at_head = c.state().token_node().is_some_and(|n| n.as_str() == "h");
        if at_head {
            let visible: Vec<_> = c
                .state()
                .active_chain()
                .iter()
                .flat_map(|i| c.state().bindings_of(i.as_str()))
                .filter(|b| b.cf_variable.as_str() == key)
                .collect();
            assert!(visible.is_empty(), "`it` still bound at the loop head: {visible:?}");
            assert_eq!(c.state().active_chain().len(), 1);
        }
        let rec = c.step().unwrap();
        if rec.node == "h" && rec.outcome == StepOutcome::Matched {
            iterations += 1;
            assert_eq!(rec.constructed, ["it"]);
            let m = rec.matched.iter().find(|e| e.var == "it").unwrap();
            assert!(picked.insert(m.model_node.clone()), "item picked twice");
        }
        check_state(&c);
    }
    assert_eq!(iterations, 5);
    assert_eq!(*c.status(), Status::Terminated);
    assert_eq!(c.state().bindings().len(), 1);
    assert_eq!(c.model().successors("box", "done").count(), 5);
    assert_eq!(c.model().successors("box", "todo").count(), 0);
}

#[test]
fn join_policies_diverge() {
    let cons = stepwise("join_policy", "list3", "i1", Strategy::Conservative);
    assert_eq!(*cons.status(), Status::Terminated);
    let opt = stepwise("join_policy", "list3", "i1", Strategy::Optimistic);
    assert_eq!(*opt.status(), Status::Error { node: "j".into() });
    let dangling: Vec<_> = opt
        .state()
        .bindings()
        .into_iter()
        .filter(|b| b.model_node.is_none())
        .collect();
    assert_eq!(dangling.len(), 1);
}

#[test]
fn conservative_join_rematches_the_invalidated_variable() {
    let r = run("join_policy", "list3", "i1");
    let exit = r.trace.records.iter().find(|x| x.node == "s").unwrap();
    assert!(exit.scope_events.contains(&"invalidate root/x".to_owned()));
    let j = r.trace.records.iter().find(|x| x.node == "j").unwrap();
    assert_eq!(j.constructed, ["x"]);
}

#[test]
fn traces_are_reproducible_and_parse_back() {
    let a = run("delete_next_object", "list4", "i1").trace.to_jsonl();
    let b = run("delete_next_object", "list4", "i1").trace.to_jsonl();
    assert_eq!(a, b);
    let parsed = Trace::from_jsonl(&a).unwrap();
    assert_eq!(parsed.to_jsonl(), a);
}

#[test]
fn replay_reproduces_every_terminated_run() {
    let cases = [
        ("delete_next_object", "list5", "i1"),
        ("two_seq", "list3", "i1"),
        ("while_loop", "tasks5", "box"),
        ("join_policy", "list3", "i1"),
        ("seq_fail", "list1", "i1"),
    ];
    for (d, m, this) in cases {
        let r = run(d, m, this);
        assert_eq!(&replay(&r.diagram, &r.initial, &r.trace).unwrap(), r.config.model(), "{d}");
    }
}

#[test]
fn binding_update_order_does_not_matter() {
    let cases = [
        ("delete_next_object", "list3", "i1"),
        ("delete_next_object", "list1", "i1"),
        ("while_loop", "tasks5", "box"),
        ("join_policy", "list3", "i1"),
    ];
    for (d, m, this) in cases {
        for s in [Strategy::Conservative, Strategy::Optimistic] {
            let (mut fwd, _) = setup(d, m, this, s, MatchOrder::Lex);
            let (mut rev, _) = setup(d, m, this, s, MatchOrder::Lex);
            rev.set_reverse_update_order(true);
            let ta = fwd.run(200).unwrap();
            let tb = rev.run(200).unwrap();
            assert_eq!(ta.to_jsonl(), tb.to_jsonl());
            assert_eq!(fwd.status(), rev.status());
            assert_eq!(fwd.model(), rev.model());
            assert!(are_isomorphic(fwd.state().graph(), rev.state().graph()), "{d} {s}");
            assert_eq!(binding_summary(&fwd), binding_summary(&rev), "{d} {s}");
        }
    }
}

#[test]
fn random_order_needs_a_seed_and_is_reproducible() {
    let a = run_with("while_loop", "tasks5", "box", Strategy::Conservative, MatchOrder::Random { seed: 3 });
    let b = run_with("while_loop", "tasks5", "box", Strategy::Conservative, MatchOrder::Random { seed: 3 });
    assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    let lex = run("while_loop", "tasks5", "box");
    assert!(are_isomorphic(a.config.model(), lex.config.model()));
    let orders: BTreeSet<String> = (0..8)
        .map(|seed| {
            let r = run_with("while_loop", "tasks5", "box", Strategy::Conservative, MatchOrder::Random { seed });
            r.trace
                .records
                .iter()
                .filter(|x| x.node == "h" && x.outcome == StepOutcome::Matched)
                .map(|x| x.matched.iter().find(|e| e.var == "it").unwrap().model_node.clone())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    assert!(orders.len() > 1, "random order never deviated from lex");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_runs_keep_the_invariants(seed in any::<u64>(), k in 1usize..=5, optimistic in any::<bool>()) {
        let s = if optimistic { Strategy::Optimistic } else { Strategy::Conservative };
        let (mut c, initial) = setup("delete_next_object", &format!("list{k}"), "i1", s, MatchOrder::Random { seed });
        let mut trace = Trace::default();
        while *c.status() == Status::Running {
            trace.records.push(c.step().unwrap());
            check_state(&c);
        }
        prop_assert_eq!(c.status(), &Status::Terminated);
        prop_assert!(has_next(c.model(), "i1"));
        prop_assert_eq!(&replay(c.diagram(), &initial, &trace).unwrap(), c.model());
    }
}
