use privarch::view::{AnnotationKind, EdgeKind, LocationView};
use privarch_core::adsl::{parse_architecture, ParseOptions};
use privarch_testkit::fixture;

fn view_of(name: &str) -> LocationView {
    LocationView::of(&parse_architecture(&fixture(name), &ParseOptions::default()).unwrap())
}

fn edge<'a>(v: &'a LocationView, from: &str, to: &str, kind: EdgeKind) -> Option<&'a privarch::view::Edge> {
    v.edges.iter().find(|e| e.from == from && e.to == to && e.kind == kind)
}

#[test]
fn meter_computes_view() {
    let v = view_of("option2.pvd");
    let nodes: Vec<&str> = v.nodes.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(nodes, ["o", "u", "m"]);
    assert_eq!(edge(&v, "m", "u", EdgeKind::Data).unwrap().labels, ["Fee"]);
    assert!(edge(&v, "u", "o", EdgeKind::Data).is_some());
    assert!(edge(&v, "u", "o", EdgeKind::Primitive).is_some());
    let trust = edge(&v, "o", "m", EdgeKind::Trust).unwrap();
    assert!(trust.dashed);
    assert!(v.annotations.iter().any(|a| a.agent == "m" && a.kind == AnnotationKind::Compute));
    assert!(v.annotations.iter().all(|a| a.agent == "m"));
    assert!(v.edges.iter().filter(|e| e.kind != EdgeKind::Trust).all(|e| !e.dashed));
}

#[test]
fn user_computes_view() {
    let v = view_of("option3.pvd");
    let proof = edge(&v, "u", "o", EdgeKind::Proof).unwrap();
    assert!(proof.labels[0].starts_with("proof(u, o,"));
    assert_eq!(edge(&v, "u", "o", EdgeKind::Data).unwrap().labels.len(), 4);
    let hh: Vec<_> = v.annotations.iter().filter(|a| a.kind == AnnotationKind::Hhash).collect();
    assert_eq!(hh.iter().filter(|a| a.agent == "u").count(), 3);
    assert!(hh.iter().any(|a| a.agent == "o" && a.text.starts_with("check(o,")));
    assert!(v.edges.iter().all(|e| e.kind != EdgeKind::Trust));
}

#[test]
fn views_without_facts_have_nodes_only() {
    let arch = parse_architecture("arch \"empty\" { agents a, b; }", &ParseOptions::default()).unwrap();
    let v = LocationView::of(&arch);
    assert_eq!(v.nodes.len(), 2);
    assert!(v.edges.is_empty() && v.annotations.is_empty());
    assert!(!v.legend.is_empty());
}

#[test]
fn json_and_dot_exports() {
    let v = view_of("option2.pvd");
    let back: LocationView = serde_json::from_str(&v.to_json()).unwrap();
    assert_eq!(back, v);
    let dot = v.to_dot();
    assert!(dot.starts_with("// location view, schema 1\ndigraph \"metering-meter-computes\" {"));
    assert!(dot.contains("\"o\" -> \"m\" [label=\"trust\", style=dashed, class=trust];"));
    assert!(dot.contains("\"m\" -> \"u\" [label=\"Fee\", style=solid, class=data];"));
    assert!(dot.trim_end().ends_with('}'));
}
