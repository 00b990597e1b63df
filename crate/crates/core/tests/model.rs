mod common;

use serde_json::Value;

use common::fixture;
use sdm::model::{
    load_model, load_story_diagram, serialize_story_diagram, validate_binding_marks, DiagramDoc,
    StoryDiagram, TemplateKind,
};
use sdm::syntax::Branch;
use sdm::LoadError;

const DIAGRAMS: [&str; 6] = ["minimal", "delete_next_object", "seq_fail", "two_seq", "while_loop", "join_policy"];

fn load(name: &str) -> StoryDiagram {
    load_story_diagram(&fixture(&format!("{name}.json"))).unwrap()
}

fn doc(name: &str) -> Value {
    serde_json::from_str(&fixture(&format!("{name}.json"))).unwrap()
}

fn set_bound(v: &mut Value, node: &str, var: &str, bound: bool) {
    let pats = v["patterns"].as_array_mut().unwrap();
    let p = pats.iter_mut().find(|p| p["node"] == node).unwrap();
    let vars = p["vars"].as_array_mut().unwrap();
    let x = vars.iter_mut().find(|x| x["name"] == var).unwrap();
    x["bound"] = Value::Bool(bound);
}

fn build(v: &Value) -> Result<StoryDiagram, LoadError> {
    serde_json::from_value::<DiagramDoc>(v.clone()).unwrap().build()
}

#[test]
fn all_diagram_fixtures_load() {
    for name in DIAGRAMS {
        let d = load(name);
        assert!(validate_binding_marks(&d).is_ok(), "{name}");
    }
}

#[test]
fn load_errors_are_classified() {
    assert!(matches!(
        load_story_diagram(&fixture("start_stop.json")),
        Err(LoadError::InvalidCfg(_))
    ));
    assert!(matches!(
        load_story_diagram(&fixture("malformed.json")),
        Err(LoadError::Parse(_))
    ));
    let mut extra = doc("minimal");
    extra["extra"] = Value::Bool(true);
    assert!(matches!(load_story_diagram(&extra.to_string()), Err(LoadError::Parse(_))));
}

#[test]
fn diagrams_round_trip() {
    for name in DIAGRAMS {
        let d = load(name);
        let text = serialize_story_diagram(&d);
        let back = load_story_diagram(&text).unwrap();
        assert_eq!(serialize_story_diagram(&back), text, "{name}");
        assert_eq!(back.scopes(), d.scopes());
    }
}

#[test]
fn exactly_one_parameter_of_a_known_type() {
    let mut v = doc("minimal");
    v["params"].as_array_mut().unwrap().push(serde_json::json!({"name": "other", "type": "Item"}));
    assert!(matches!(build(&v), Err(LoadError::Diagram(_))));
    let mut v = doc("minimal");
    v["params"][0]["type"] = Value::from("Nope");
    assert!(matches!(build(&v), Err(LoadError::Diagram(_))));
}

#[test]
fn every_story_node_needs_a_pattern() {
    let mut v = doc("seq_fail");
    v["patterns"].as_array_mut().unwrap().retain(|p| p["node"] != "n2");
    assert!(matches!(build(&v), Err(LoadError::Diagram(_))));
    let mut v = doc("minimal");
    let mut stray = v["patterns"][0].clone();
    stray["node"] = Value::from("stop");
    v["patterns"].as_array_mut().unwrap().push(stray);
    assert!(build(&v).is_err());
}

#[test]
fn bound_mark_after_a_deleting_branch_is_rejected() {
    let mut v = doc("join_policy");
    set_bound(&mut v, "j", "x", true);
    let d = build(&v).unwrap();
    let report = validate_binding_marks(&d);
    assert_eq!(report.violations.len(), 1);
    let viol = &report.violations[0];
    assert_eq!(viol.node.as_str(), "j");
    assert_eq!(viol.variable, "x");
    let path: Vec<&str> = viol.path.iter().map(|n| n.as_str()).collect();
    assert_eq!(path, ["start", "n1", "c", "s", "j"]);
    assert!(matches!(load_story_diagram(&v.to_string()), Err(LoadError::Binding(_))));
}

#[test]
fn bound_mark_on_a_first_occurrence_is_rejected() {
    let mut v = doc("two_seq");
    set_bound(&mut v, "n1", "x", true);
    let report = validate_binding_marks(&build(&v).unwrap());
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].node.as_str(), "n1");
}

#[test]
fn loop_body_bindings_do_not_reach_the_exit() {
    let mut v = doc("while_loop");
    set_bound(&mut v, "fin", "this", true);
    assert!(validate_binding_marks(&build(&v).unwrap()).is_ok());
    // `it` is only matched inside the loop condition's success scope
    let pats = v["patterns"].as_array_mut().unwrap();
    let fin = pats.iter_mut().find(|p| p["node"] == "fin").unwrap();
    let rule = doc("while_loop")["patterns"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["node"] == "b")
        .unwrap()
        .clone();
    fin["rule"] = rule["rule"].clone();
    fin["vars"] = rule["vars"].clone();
    let d = build(&v).unwrap();
    let report = validate_binding_marks(&d);
    assert!(report.violations.iter().any(|x| x.node.as_str() == "fin" && x.variable == "it"));
}

#[test]
fn join_scopes() {
    let d = load("join_policy");
    let s = d.scopes();
    assert_eq!(s.templates().len(), 3);
    let ts = s.branch_template("c", Branch::Success).unwrap();
    let tf = s.branch_template("c", Branch::Failure).unwrap();
    assert_eq!(s.template(ts).kind, TemplateKind::JoinBranch);
    assert_eq!(s.template(ts).id, "c.success");
    assert_eq!(s.template(tf).id, "c.failure");
    assert_eq!(s.template_of("s"), Some(ts));
    assert_eq!(s.template_of("f"), Some(tf));
    assert_eq!(s.template_of("j"), Some(s.root()));
    assert_eq!(s.template_of("c"), Some(s.root()));
    let x = s.resolve("s", "x").unwrap();
    assert_eq!(s.variable(x).template, s.root());
    assert_eq!(s.resolve("s", "x"), s.resolve("j", "x"));
    assert_eq!(s.variable_key(x), "root/x");
    assert_eq!(s.chain(ts), vec![ts, s.root()]);
    assert_eq!(s.max_depth(), 1);
}

#[test]
fn split_scopes() {
    let d = load("delete_next_object");
    let s = d.scopes();
    let t1 = s.branch_template("c1", Branch::Success).unwrap();
    assert_eq!(s.template(t1).kind, TemplateKind::SplitBranch);
    assert!(s.template(t1).members.iter().any(|n| n.as_str() == "s1"));
    let f1 = s.branch_template("c1", Branch::Failure).unwrap();
    let inner = s.branch_template("c2", Branch::Success).unwrap();
    assert_eq!(s.template(f1).kind, TemplateKind::SplitBranch);
    assert_eq!(s.template(inner).kind, TemplateKind::JoinBranch);
    assert_eq!(s.template(inner).parent, Some(f1));
    assert_eq!(s.template_of("j"), Some(f1));
    assert_eq!(s.depth(inner), 2);
    // `nextNext` first occurs in c1, declared in root and visible in s1
    let nn = s.resolve("s1", "nextNext").unwrap();
    assert_eq!(s.variable(nn).template, s.root());
    // `newNext` only occurs at j and is declared there
    let nw = s.resolve("j", "newNext").unwrap();
    assert_eq!(s.variable(nw).template, f1);
    assert!(s.resolve("s1", "newNext").is_none());
}

#[test]
fn loop_scopes() {
    let d = load("while_loop");
    let s = d.scopes();
    let body = s.branch_template("h", Branch::Success).unwrap();
    let exit = s.branch_template("h", Branch::Failure).unwrap();
    assert_eq!(s.template(body).kind, TemplateKind::LoopBody);
    assert_eq!(s.template(exit).kind, TemplateKind::LoopExit);
    assert!(s.template(exit).members.is_empty());
    assert_eq!(s.template_of("fin"), Some(s.root()));
    assert_eq!(s.template_of("b"), Some(body));
    let it = s.resolve("b", "it").unwrap();
    assert_eq!(s.variable(it).template, s.root());
    assert!(s.visible(body).contains(&it));
}

#[test]
fn models_are_checked_against_the_diagram_typegraph() {
    let d = load("minimal");
    assert!(load_model(&fixture("list3.json"), &d).is_ok());
    assert!(load_model(&fixture("tasks5.json"), &d).is_err());
    let bad = r#"{"typegraph":"List","nodes":[{"id":"a","type":"Ghost"}],"edges":[]}"#;
    assert!(load_model(bad, &d).is_err());
}
