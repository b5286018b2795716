use std::process::{Command, Output};

use serde_json::Value;

use privarch_testkit::{fixture_dir, FIXTURES};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privarch"))
        .args(args)
        .current_dir(fixture_dir())
        .env_remove("PRIVARCH_N")
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn check_exit_codes_follow_the_outcome() {
    assert_eq!(code(&["check", "scenario1.pvd", "metering.req"]), 2);
    assert_eq!(code(&["check", "option2.pvd", "metering.req"]), 0);
    assert_eq!(code(&["check", "option3.pvd", "metering.req"]), 0);
    assert_eq!(code(&["check", "links-only.pvd", "metering.req"]), 3);
    assert_eq!(code(&["check", "missing.pvd", "metering.req"]), 1);
    assert_eq!(code(&["check", "metering.req", "metering.req"]), 1);
}

#[test]
fn text_report_shows_violation_witnesses() {
    let out = run(&["check", "scenario1.pvd", "metering.req"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("violated"), "{text}");
    assert!(text.contains("RECV-HAS"), "{text}");
    assert!(text.trim_end().ends_with("status: contradictory"));
}

#[test]
fn index_bound_override_and_environment() {
    let out = run(&["check", "option3.pvd", "metering.req", "--n", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["verdicts"].as_array().unwrap().len() == 8, "{doc}");
    let bad = Command::new(env!("CARGO_BIN_EXE_privarch"))
        .args(["check", "option3.pvd", "metering.req"])
        .current_dir(fixture_dir())
        .env("PRIVARCH_N", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn explain_prints_derivations() {
    let out = run(&["explain", "option2.pvd", "--fact", "has(o, Fee)"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("RECV-HAS"), "{text}");

    let out = run(&["explain", "option2.pvd", "--fact", "X(o, Fee = sum(P(C[1]), P(C[2]), P(C[3])))", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["derivable"], true);
    assert_eq!(doc["tree"]["rule"], "XD");

    let out = run(&["explain", "option2.pvd", "--fact", "has(o, C[1])", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["derivable"], false);

    let out = run(&["explain", "option2.pvd", "--fact", "has(o,"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("1:"));
}

#[test]
fn view_exports_dot_and_json() {
    let out = run(&["view", "option3.pvd"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("class=proof"));
    let out = run(&["view", "option3.pvd", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
}

#[tokio::test]
async fn cli_and_service_agree_on_verdicts() {
    use axum::body::Body;
    use axum::http::Request;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let app = privarch::service::router();
    for name in FIXTURES {
        let out = run(&["check", name, "metering.req", "--format", "json"]);
        let cli: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(cli["schema_version"], 1);
        let body = serde_json::json!({
            "arch_text": privarch_testkit::fixture(name),
            "reqs_text": privarch_testkit::fixture("metering.req"),
        });
        let req = Request::post("/sessions").header("content-type", "application/json").body(Body::from(body.to_string()));
        let resp = app.clone().oneshot(req.unwrap()).await.unwrap();
        let svc: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
        assert_eq!(cli["verdicts"], svc["verdicts"], "{name}");
        assert_eq!(cli["outcome"], svc["outcome"], "{name}");
    }
}
