mod common;

use std::sync::Arc;

use proptest::prelude::*;

use common::{brute_isomorphic, brute_matches, fixture, naive_pushout, random_graph, random_rule, test_typegraph};
use sdm::graph::TypedGraph;
use sdm::model::{load_model, load_story_diagram, StoryDiagram};
use sdm::oracle::{cross_check, sem_diagram, sem_if, sem_node, sem_seq, sem_while, OracleOptions, SemSet, Verdict};
use sdm::spo::{Mark, Rule, RuleBuilder};
use sdm::step::{Configuration, MatchOrder, Strategy, Trace};
use sdm::OracleError;

/// Outputs of one rule, built from the exhaustive matcher and the naive
/// pushout, deduplicated by brute-force isomorphism.
fn brute_sem_node(r: &Rule, g: &TypedGraph) -> Vec<TypedGraph> {
    let ms = brute_matches(r, g);
    if ms.is_empty() {
        return vec![g.clone()];
    }
    let mut out: Vec<TypedGraph> = Vec::new();
    for m in &ms {
        let h = naive_pushout(r, m, g);
        if !out.iter().any(|o| brute_isomorphic(o, &h)) {
            out.push(h);
        }
    }
    out
}

fn same_outputs(a: &SemSet, b: &[TypedGraph]) -> bool {
    a.len() == b.len() && b.iter().all(|h| a.contains_output(h))
}

fn chain(n: usize) -> TypedGraph {
    let mut g = TypedGraph::new(test_typegraph());
    for i in 0..n {
        g.add_node(format!("a{i}"), "A").unwrap();
    }
    for i in 1..n {
        g.add_edge(format!("r{i}"), format!("a{}", i - 1), format!("a{i}"), "r").unwrap();
    }
    g
}

fn drop_edge() -> Rule {
    RuleBuilder::new("drop", &test_typegraph())
        .keep("x", "A")
        .keep("y", "A")
        .edge("x", "r", "y", Mark::Delete)
        .build()
        .unwrap()
}

fn noop() -> Rule {
    RuleBuilder::new("noop", &test_typegraph()).keep("x", "A").build().unwrap()
}

fn add_c() -> Rule {
    RuleBuilder::new("add-c", &test_typegraph())
        .keep("x", "A")
        .create("c", "C")
        .edge("x", "s", "c", Mark::Create)
        .build()
        .unwrap()
}

fn load(name: &str) -> Arc<StoryDiagram> {
    Arc::new(load_story_diagram(&fixture(&format!("{name}.json"))).unwrap())
}

fn execute(d: &Arc<StoryDiagram>, model: &str, this: &str) -> (TypedGraph, Trace, TypedGraph) {
    let m = load_model(&fixture(&format!("{model}.json")), d).unwrap();
    let mut c = Configuration::initialize(d.clone(), m.clone(), this, Strategy::Conservative, MatchOrder::Lex).unwrap();
    let t = c.run(500).unwrap();
    (m, t, c.model().clone())
}

#[test]
fn inapplicable_rule_denotes_identity() {
    let g = TypedGraph::new(test_typegraph());
    let s = sem_node(&noop(), &g);
    assert_eq!(s.len(), 1);
    assert!(s.contains(&g, &g));
}

#[test]
fn sequence_composes_relations() {
    let g = chain(3);
    let (a, b) = (drop_edge(), add_c());
    let ab = sem_seq(&[&a, &b], &g);
    let mut expected: Vec<TypedGraph> = Vec::new();
    for h in brute_sem_node(&a, &g) {
        for k in brute_sem_node(&b, &h) {
            if !expected.iter().any(|o| brute_isomorphic(o, &k)) {
                expected.push(k);
            }
        }
    }
    assert!(same_outputs(&ab, &expected));
    assert!(sem_seq(&[], &g).contains(&g, &g));
}

#[test]
fn conditional_takes_the_applicable_branch() {
    let (cond, yes, no) = (drop_edge(), noop(), add_c());
    let with_edge = chain(2);
    let s = sem_if(&cond, &yes, &no, &with_edge);
    assert_eq!(s.len(), 1);
    assert_eq!(s.outputs()[0].edge_count(), 0);
    let lone = chain(1);
    let s = sem_if(&cond, &yes, &no, &lone);
    assert_eq!(s.len(), 1);
    assert_eq!(s.outputs()[0].node_count(), 2);
}

#[test]
fn loops_run_until_the_condition_fails() {
    let g = chain(4);
    let s = sem_while(&drop_edge(), &noop(), &g, 10);
    assert!(s.is_complete());
    assert_eq!(s.len(), 1);
    assert_eq!(s.outputs()[0].edge_count(), 0);
    let cut = sem_while(&drop_edge(), &noop(), &g, 2);
    assert!(!cut.is_complete());
    assert!(cut.is_empty());
}

#[test]
fn runs_agree_with_the_set_semantics() {
    let cases = [
        ("minimal", "list1", "i1"),
        ("two_seq", "list3", "i1"),
        ("while_loop", "tasks5", "box"),
        ("join_policy", "list3", "i1"),
        ("delete_next_object", "list1", "i1"),
        ("delete_next_object", "list2", "i1"),
        ("delete_next_object", "list3", "i1"),
        ("delete_next_object", "list4", "i1"),
        ("delete_next_object", "list5", "i1"),
    ];
    for (dn, m, this) in cases {
        let d = load(dn);
        let (initial, trace, out) = execute(&d, m, this);
        let set = sem_diagram(&d, &initial, 16).unwrap();
        assert!(set.contains(&initial, &out), "{dn} on {m}");
        let check = cross_check(&d, &initial, this, &trace, OracleOptions::default()).unwrap();
        assert!(matches!(check.verdict, Verdict::Agree(_)), "{dn} on {m}: {}", check.verdict);
        assert!(check.complete);
    }
}

#[test]
fn sequential_failure_is_a_documented_divergence() {
    let d = load("seq_fail");
    let (initial, trace, _) = execute(&d, "list1", "i1");
    let check = cross_check(&d, &initial, "i1", &trace, OracleOptions::default()).unwrap();
    assert!(matches!(check.verdict, Verdict::DocumentedDivergence(_)), "{}", check.verdict);
    assert!(!check.verdict.is_disagreement());
    let set = sem_diagram(&d, &initial, 16).unwrap();
    assert!(set.contains(&initial, &initial));
}

#[test]
fn oversized_models_are_refused() {
    let d = load("minimal");
    let mut big = load_model(&fixture("list5.json"), &d).unwrap();
    big.add_node("i6", "Item").unwrap();
    big.add_node("i7", "Item").unwrap();
    let r = cross_check(&d, &big, "i1", &Trace::default(), OracleOptions::default());
    assert!(matches!(r, Err(OracleError::Oversized { nodes: 7, bound: 6 })));
}

#[test]
fn traces_that_do_not_replay_are_errors() {
    let d = load("two_seq");
    let (initial, mut trace, _) = execute(&d, "list3", "i1");
    trace.records[0].matched[1].model_node = "i3".into();
    let r = cross_check(&d, &initial, "i1", &trace, OracleOptions::default());
    assert!(matches!(r, Err(OracleError::Replay(_))));
}

#[test]
fn failure_body_loops_are_unsupported() {
    let mut v: serde_json::Value = serde_json::from_str(&fixture("while_loop.json")).unwrap();
    for e in v["cfg"]["edges"].as_array_mut().unwrap() {
        let flip = match e["type"].as_str().unwrap() {
            "success" => Some("failure"),
            "failure" => Some("success"),
            _ => None,
        };
        if let Some(f) = flip {
            e["type"] = serde_json::Value::from(f);
        }
    }
    let b = v["patterns"].as_array_mut().unwrap().iter_mut().find(|p| p["node"] == "b").unwrap();
    for x in b["vars"].as_array_mut().unwrap() {
        if x["name"] == "it" {
            x["bound"] = serde_json::Value::Bool(false);
        }
    }
    let d = Arc::new(load_story_diagram(&v.to_string()).unwrap());
    let m = load_model(&fixture("tasks5.json"), &d).unwrap();
    assert!(matches!(sem_diagram(&d, &m, 16), Err(OracleError::Unsupported(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn node_semantics_matches_brute_force(rs in any::<u64>(), gs in any::<u64>()) {
        let r = random_rule(rs, false);
        let g = random_graph(gs, 4);
        let s = sem_node(&r, &g);
        prop_assert!(same_outputs(&s, &brute_sem_node(&r, &g)));
    }

    #[test]
    fn sequence_is_associative(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), gs in any::<u64>()) {
        let (ra, rb, rc) = (random_rule(a, false), random_rule(b, false), random_rule(c, false));
        let g = random_graph(gs, 3);
        let whole = sem_seq(&[&ra, &rb, &rc], &g);
        let mut stepwise = SemSet::empty(g.clone());
        for h in sem_seq(&[&ra, &rb], &g).outputs() {
            for k in sem_node(&rc, h).outputs() {
                stepwise.insert(k.clone());
            }
        }
        prop_assert_eq!(whole.len(), stepwise.len());
        prop_assert!(stepwise.outputs().iter().all(|h| whole.contains_output(h)));
    }
}
