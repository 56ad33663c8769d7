use std::path::PathBuf;
use std::process::Command;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::DateTime;
use depmap_core::report::run_analysis_at;
use depmap_service::{router, AppState, ServiceConfig, CACHE_HEADER, ROUTE};
use http_body_util::BodyExt;
use tower::ServiceExt;

const EPOCH: i64 = 1_700_000_000;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn app() -> axum::Router {
    router(AppState::new(ServiceConfig {
        cache_ttl: Duration::from_secs(60),
        fixed_time: DateTime::from_timestamp(EPOCH, 0),
    }))
}

async fn post(app: axum::Router, body: String) -> (StatusCode, Option<String>, String) {
    let req = Request::post(ROUTE).body(Body::from(body)).unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let cache = resp.headers().get(CACHE_HEADER).map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, cache, String::from_utf8(bytes.to_vec()).unwrap())
}

fn body_for(name: &str, filter: Option<&str>) -> String {
    serde_json::json!({ "repoPath": fixture(name), "filter": filter }).to_string()
}

fn expected(name: &str, filter: Option<&str>) -> String {
    run_analysis_at(&fixture(name), filter, DateTime::from_timestamp(EPOCH, 0).unwrap()).unwrap().to_canonical_json()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_stay_isolated() {
    let app = app();
    let mut handles = Vec::new();
    for i in 0..16 {
        let name = if i % 2 == 0 { "motivating" } else { "cycle3" };
        let app = app.clone();
        handles.push(tokio::spawn(async move { (name, post(app, body_for(name, None)).await) }));
    }
    for h in handles {
        let (name, (status, _, body)) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body, expected(name, None), "{name}");
    }
}

#[tokio::test]
async fn filter_and_cache_header() {
    let app = app();
    let (status, cache, body) = post(app.clone(), body_for("motivating", Some("train1"))).await;
    assert_eq!((status, cache.as_deref()), (StatusCode::OK, Some("miss")));
    assert_eq!(body, expected("motivating", Some("train1")));
    let (_, cache, body) = post(app.clone(), body_for("motivating", Some("A2"))).await;
    assert_eq!(cache.as_deref(), Some("hit"));
    assert_eq!(body, expected("motivating", Some("A2")));
}

#[tokio::test]
async fn error_bodies_name_the_problem() {
    let app = app();
    let (status, _, body) = post(app.clone(), r#"{"filter": 1}"#.into()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["fields"].as_array().unwrap().len(), 2);

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("depmap.json"),
        r#"{"schema_version": 1, "graphs": [{"id": "g", "activities": [{"id": "a", "kind": "script"}]}]}"#,
    )
    .unwrap();
    let body = serde_json::json!({ "repoPath": dir.path() }).to_string();
    let (status, _, body) = post(app.clone(), body).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body.contains("graphs[0].activities[0]"), "{body}");
}

#[tokio::test]
async fn healthz_answers() {
    let resp = app().oneshot(Request::get("/healthz").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_depmap");
    let ok = Command::new(bin).args(["analyze", "--repo"]).arg(fixture("cycle2")).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let missing = Command::new(bin).args(["analyze", "--repo", "/nonexistent/depmap"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let usage = Command::new(bin).args(["analyze", "--bogus"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn cli_bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"n_graphs": 3, "activities_per_graph": 2, "avg_activity_tokens": 100, "deps_per_graph": 4, "cross_graph_fraction": 0.3, "seed": 1}"#).unwrap();
    let out = dir.path().join("bench.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_depmap"))
        .args(["bench", "--repetitions", "1", "--seed", "9", "--spec"])
        .arg(&spec)
        .arg("--workdir")
        .arg(dir.path().join("corpus"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("m0")).count(), 3);
    assert!(csv.contains("model_id,avg_act_size"));
}
