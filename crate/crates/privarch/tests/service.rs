use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use privarch::service::router;
use privarch::view::LocationView;
use privarch_core::adsl::{parse_architecture, ParseOptions};
use privarch_core::engine::DerivationTree;
use privarch_testkit::fixture;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let doc: Value = serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&bytes)));
    assert_eq!(doc["schema_version"], 1, "{uri}: {doc}");
    (status, doc)
}

async fn open(app: &Router, arch: &str) -> String {
    let body = json!({ "arch_text": fixture(arch), "reqs_text": fixture("metering.req") });
    let (status, doc) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    doc["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn scenario_one_is_reported_contradictory() {
    let app = router();
    let body = json!({ "arch_text": fixture("scenario1.pvd"), "reqs_text": fixture("metering.req") });
    let (status, doc) = call(&app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["status"], "contradictory");
    assert_eq!(doc["outcome"]["violated"].as_array().unwrap().len(), 3, "{doc}");
}

#[tokio::test]
async fn applying_a_suggestion_completes_the_design() {
    let app = router();
    let id = open(&app, "links-only.pvd").await;
    let (status, doc) = call(&app, Method::GET, &format!("/sessions/{id}/suggestions"), None).await;
    assert_eq!(status, StatusCode::OK);
    let first = &doc["suggestions"][0];
    assert_eq!(first["index"], 0);
    assert_eq!(first["application"]["pattern"], "AttestedComputation");

    let (status, doc) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(json!({ "suggestion": 0 }))).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    let (_, doc) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(doc["status"], "complete");
    assert_eq!(doc["history"].as_array().unwrap().len(), 1);

    let (status, doc) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["status"], "underspecified");
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn explicit_applications_and_facts() {
    let app = router();
    let id = open(&app, "links-only.pvd").await;
    let application = json!({
        "pattern": "ZkProof",
        "substitution": { "verifier": "o", "x": "Fee", "t": "sum(P(C[1]), P(C[2]), P(C[3]))", "prover": "u" },
        "induced": [], "fresh_agents": [], "fresh_variables": {}
    });
    let (status, doc) =
        call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(json!({ "application": application }))).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["status"], "complete");

    let bad = json!({ "application": { "pattern": "ZkProof", "substitution": { "verifier": "u", "x": "Fee", "t": "sum(P(C[1]), P(C[2]), P(C[3]))", "prover": "o" } } });
    let (status, doc) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(bad)).await;
    assert_eq!(status, StatusCode::CONFLICT, "{doc}");

    let (status, doc) = call(&app, Method::POST, &format!("/sessions/{id}/facts"), Some(json!({ "fact_text": "receive(o, m, var C[1])" }))).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["status"], "contradictory");
    assert_eq!(doc["history"][1]["kind"], "facts");

    let (status, doc) = call(&app, Method::GET, &format!("/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(doc["architecture"].as_str().unwrap().contains("receive(o, m, var C[1])"));
    assert!(!doc["initial"].as_str().unwrap().contains("receive(o, m, var C[1])"));
}

#[tokio::test]
async fn errors_have_statuses_and_spans() {
    let app = router();
    let (status, doc) = call(&app, Method::POST, "/sessions/nope/undo", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(doc["error"].as_str().unwrap().contains("nope"));
    let (status, _) = call(&app, Method::GET, "/sessions/nope/view", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, doc) = call(&app, Method::POST, "/sessions", Some(json!({ "arch_text": "arch \"x\" { agents o; fact has(o, ; }" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let first = &doc["errors"][0];
    assert_eq!(first["span"]["line"], 1);
    assert!(first["span"]["column"].as_u64().unwrap() > 1);

    let id = open(&app, "option3.pvd").await;
    let (status, doc) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(json!({ "suggestion": 0 }))).await;
    assert_eq!(status, StatusCode::CONFLICT, "{doc}");
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/facts"), Some(json!({ "fact_text": "has(o, Nope)" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn view_and_trace_round_trip() {
    let app = router();
    let id = open(&app, "option2.pvd").await;
    let (status, doc) = call(&app, Method::GET, &format!("/sessions/{id}/view"), None).await;
    assert_eq!(status, StatusCode::OK);
    let view: LocationView = serde_json::from_value(doc).unwrap();
    let arch = parse_architecture(&fixture("option2.pvd"), &ParseOptions::default()).unwrap();
    assert_eq!(view, LocationView::of(&arch));

    let (status, doc) = call(&app, Method::GET, &format!("/sessions/{id}/trace?fact=has(o,%20Fee)"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["derivable"], true);
    assert_eq!(doc["agent"], "o");
    let tree: DerivationTree = serde_json::from_value(doc["tree"].clone()).unwrap();
    assert_eq!(tree.conclusion.to_string(), "has(o, Fee)");

    let (status, doc) = call(&app, Method::GET, &format!("/sessions/{id}/trace?fact=has(o,%20C%5B1%5D)"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["derivable"], false);
    assert!(doc["tree"].is_null());
}
