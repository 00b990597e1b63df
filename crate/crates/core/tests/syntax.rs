mod common;

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdm::graph::{are_isomorphic, parse_graph, NodeId, TypedGraph};
use sdm::spo::{enumerate_language, parse_rule, Language, RuleDoc};
use sdm::syntax::{
    classify_nodes, start_graph, syntax_grammar, syntax_rules, syntax_typegraph, validate_control_flow,
    Branch, NodeClass, RuleCategory, ValidatedCfg, CF_NODE, FAILURE, NEXT, START_NODE, STOP_NODE, SUCCESS,
};

fn language(max: usize) -> Language {
    enumerate_language(&syntax_grammar(), max).unwrap()
}

fn cfg(nodes: &[(&str, &str)], edges: &[(&str, &str, &str)]) -> TypedGraph {
    let mut g = TypedGraph::new(syntax_typegraph());
    for (n, t) in nodes {
        g.add_node(*n, *t).unwrap();
    }
    for (i, (s, t, d)) in edges.iter().enumerate() {
        g.add_edge(format!("e{i}"), *s, *d, *t).unwrap();
    }
    g
}

/// start -> c; c -s-> x -> j; c -f-> y -> j; j -> stop
fn diamond() -> TypedGraph {
    cfg(
        &[
            ("start", START_NODE),
            ("c", CF_NODE),
            ("x", CF_NODE),
            ("y", CF_NODE),
            ("j", CF_NODE),
            ("stop", STOP_NODE),
        ],
        &[
            ("start", NEXT, "c"),
            ("c", SUCCESS, "x"),
            ("c", FAILURE, "y"),
            ("x", NEXT, "j"),
            ("y", NEXT, "j"),
            ("j", NEXT, "stop"),
        ],
    )
}

#[test]
fn sixteen_rules_in_four_categories() {
    let rules = syntax_rules();
    assert_eq!(rules.len(), 16);
    let mut counts: BTreeMap<RuleCategory, usize> = BTreeMap::new();
    for r in &rules {
        *counts.entry(r.kind.category()).or_default() += 1;
    }
    assert_eq!(counts[&RuleCategory::Sequential], 1);
    assert_eq!(counts[&RuleCategory::JoiningConditional], 1);
    assert_eq!(counts[&RuleCategory::NonJoiningConditional], 4);
    assert_eq!(counts[&RuleCategory::Loop], 10);
    let mut names: Vec<&str> = rules.iter().map(|r| r.rule.name()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 16);
    assert!(rules.iter().all(|r| r.rule.is_monotone()));
}

#[test]
fn exported_rule_documents_match_the_built_rules() {
    let dir = common::fixture_path("syntax_rules");
    let tg = syntax_typegraph();
    for r in syntax_rules() {
        let path = format!("{dir}/{}.json", r.rule.name());
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
        let doc: RuleDoc = serde_json::from_str(&text).unwrap();
        assert!(doc.provisional);
        let mut fresh = RuleDoc::from_rule(&r.rule);
        fresh.provisional = true;
        assert_eq!(doc, fresh, "{path} is out of date");
        assert_eq!(parse_rule(&text, &tg).unwrap(), r.rule);
    }
}

#[test]
fn smallest_language_is_the_start_graph() {
    let l3 = language(3);
    assert_eq!(l3.len(), 1);
    assert!(are_isomorphic(&l3.members[0], &start_graph()));
    assert!(l3.warnings.is_empty());
}

#[test]
fn four_nodes_include_the_sequential_chain() {
    let chain = cfg(
        &[("s", START_NODE), ("a", CF_NODE), ("b", CF_NODE), ("t", STOP_NODE)],
        &[("s", NEXT, "a"), ("a", NEXT, "b"), ("b", NEXT, "t")],
    );
    let l4 = language(4);
    assert!(l4.contains(&chain));
    assert!(l4.members.iter().all(|m| m.node_count() <= 4));
}

#[test]
fn bound_below_start_is_an_error() {
    assert!(enumerate_language(&syntax_grammar(), 2).is_err());
}

#[test]
fn language_members_validate_with_replayable_derivations() {
    for g in &language(6).members {
        let v = validate_control_flow(g).unwrap();
        let replayed = v.derivation().replay().unwrap();
        assert!(are_isomorphic(&replayed, g));
        let again = ValidatedCfg::from_witness(g.clone(), v.derivation().clone()).unwrap();
        assert_eq!(again.classification(), v.classification());
        let cf = g.nodes_of_type(CF_NODE).count();
        assert_eq!(v.classification().len(), cf);
    }
}

#[test]
fn validation_agrees_with_membership_on_mutants() {
    let lang = language(6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..400 {
        let base = lang.members.choose(&mut rng).unwrap();
        let m = common::mutate_cfg(base, &mut rng);
        if m.node_count() > 6 {
            continue;
        }
        assert_eq!(validate_control_flow(&m).is_ok(), lang.contains(&m), "{m:?}");
        checked += 1;
    }
    assert!(checked > 300);
}

#[test]
fn invalid_graphs_carry_a_reason() {
    let no_cf = cfg(&[("s", START_NODE), ("t", STOP_NODE)], &[("s", NEXT, "t")]);
    assert!(!validate_control_flow(&no_cf).unwrap_err().0.is_empty());
    let mut extra = diamond();
    extra.add_node("orphan", CF_NODE).unwrap();
    assert!(validate_control_flow(&extra).is_err());
    let mut forged = diamond();
    let v = validate_control_flow(&forged).unwrap();
    forged.add_edge("zz", "x", "y", NEXT).unwrap();
    assert!(ValidatedCfg::from_witness(forged, v.derivation().clone()).is_err());
}

#[test]
fn classification_of_a_diamond() {
    let v = validate_control_flow(&diamond()).unwrap();
    let c = classify_nodes(&v);
    assert_eq!(
        c.get("c"),
        Some(&NodeClass::ConditionalJoining { join: "j".into() })
    );
    for n in ["x", "y", "j"] {
        assert_eq!(c.get(n), Some(&NodeClass::Sequential));
    }
}

#[test]
fn classification_of_loops_and_open_branches() {
    let lp = cfg(
        &[("start", START_NODE), ("h", CF_NODE), ("b", CF_NODE), ("f", CF_NODE), ("stop", STOP_NODE)],
        &[
            ("start", NEXT, "h"),
            ("h", SUCCESS, "b"),
            ("b", NEXT, "h"),
            ("h", FAILURE, "f"),
            ("f", NEXT, "stop"),
        ],
    );
    let v = validate_control_flow(&lp).unwrap();
    assert_eq!(
        v.classification().get("h"),
        Some(&NodeClass::LoopHead { body: Branch::Success })
    );
    let open = cfg(
        &[("start", START_NODE), ("c", CF_NODE), ("s", CF_NODE), ("t1", STOP_NODE), ("t2", STOP_NODE)],
        &[("start", NEXT, "c"), ("c", SUCCESS, "s"), ("s", NEXT, "t1"), ("c", FAILURE, "t2")],
    );
    let v = validate_control_flow(&open).unwrap();
    match v.classification().get("c") {
        Some(NodeClass::ConditionalNonjoining {
            success_stops,
            failure_stops,
        }) => {
            assert_eq!(success_stops, &vec![NodeId::from("t1")]);
            assert_eq!(failure_stops, &vec![NodeId::from("t2")]);
        }
        other => panic!("unexpected class {other:?}"),
    }
}

#[test]
fn diagram_fixtures_have_valid_control_flow() {
    let tg = syntax_typegraph();
    for name in ["minimal", "delete_next_object", "seq_fail", "two_seq", "while_loop", "join_policy"] {
        let doc: serde_json::Value = serde_json::from_str(&common::fixture(&format!("{name}.json"))).unwrap();
        let g = parse_graph(&doc["cfg"].to_string(), &tg).unwrap();
        assert!(validate_control_flow(&g).is_ok(), "{name}");
    }
}

