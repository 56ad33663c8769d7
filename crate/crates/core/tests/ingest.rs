use std::path::{Path, PathBuf};

use depmap_core::diagnostics::DiagnosticCode;
use depmap_core::engine::analyze_repository;
use depmap_core::error::IngestError;
use depmap_core::ingest::{load_manifest, load_repository, ManifestDoc};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn write(root: &Path, rel: &str, text: &str) {
    std::fs::write(root.join(rel), text).unwrap();
}

const ONE_SCRIPT: &str = r#"{"schema_version": 1, "graphs": [{"id": "g", "activities": [
    {"id": "train", "kind": "script", "path": "train.py", "inputs": ["a.csv", "b.csv"]}
]}]}"#;

#[test]
fn motivating_fixture_shape() {
    let repo = load_repository(&fixture("motivating")).unwrap();
    assert_eq!(repo.graphs.len(), 2);
    assert_eq!(repo.graphs.iter().map(|g| g.activities.len()).sum::<usize>(), 3);
    assert!(repo.graphs.iter().flat_map(|g| &g.activities).all(|a| a.content.is_ok()));
    assert!(repo.graphs.iter().all(|g| g.reads.is_empty() && g.writes.is_empty()));
}

#[test]
fn empty_graph_list_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", r#"{"schema_version": 1, "graphs": []}"#);
    let repo = load_repository(dir.path()).unwrap();
    assert!(repo.graphs.is_empty());
}

#[test]
fn missing_manifest_and_root() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_manifest(dir.path()), Err(IngestError::MissingManifest(_))));
    assert!(matches!(load_manifest(&dir.path().join("nope")), Err(IngestError::MissingRoot(_))));
}

#[test]
fn declared_inputs_mismatch_is_diagnosed() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", ONE_SCRIPT);
    write(dir.path(), "train.py", "d = pd.read_csv('a.csv')\ne = pd.read_csv('c.csv')\nm.fit(d, e)\n");
    let an = analyze_repository(&load_repository(dir.path()).unwrap());
    let r = an.graphs["g"].as_ref().unwrap();
    let d = r.diagnostics.iter().find(|d| d.code == DiagnosticCode::InputMismatch).unwrap();
    assert!(d.message.contains("\"b.csv\"") && d.message.contains("\"c.csv\""), "{}", d.message);
}

#[test]
fn missing_artifact_is_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", ONE_SCRIPT);
    let repo = load_repository(dir.path()).unwrap();
    assert!(repo.graphs[0].activities[0].content.is_err());
    let an = analyze_repository(&repo);
    assert!(an.graphs["g"].is_err());
}

#[cfg(unix)]
#[test]
fn symlink_out_of_root_is_not_read() {
    let outside = tempfile::tempdir().unwrap();
    write(outside.path(), "secret.py", "m.fit(pd.read_csv('secret'))\n");
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", ONE_SCRIPT);
    std::os::unix::fs::symlink(outside.path().join("secret.py"), dir.path().join("train.py")).unwrap();
    let repo = load_repository(dir.path()).unwrap();
    let err = repo.graphs[0].activities[0].content.as_ref().unwrap_err();
    assert!(err.contains("outside"), "{err}");
}

#[test]
fn path_escape_is_rejected_before_reading() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", &ONE_SCRIPT.replace("train.py", "../train.py"));
    match load_repository(dir.path()) {
        Err(IngestError::PathEscape { activity, .. }) => assert_eq!(activity, "train"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn fingerprint_tracks_artifact_bytes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", ONE_SCRIPT);
    write(dir.path(), "train.py", "m.fit(pd.read_csv('a.csv'))\n");
    let a = load_repository(dir.path()).unwrap().fingerprint;
    assert_eq!(a, load_repository(dir.path()).unwrap().fingerprint);
    write(dir.path(), "train.py", "m.fit(pd.read_csv('b.csv'))\n");
    assert_ne!(a, load_repository(dir.path()).unwrap().fingerprint);
}

#[test]
fn analyzer_config_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "depmap.json", ONE_SCRIPT);
    write(dir.path(), "train.py", "d = spark.load('a.csv')\nm.learn(d)\n");
    write(dir.path(), "analyzer.json", r#"{"sourceFunctions": ["load"], "sinkFunctions": ["learn"]}"#);
    let an = analyze_repository(&load_repository(dir.path()).unwrap());
    assert!(an.graphs["g"].as_ref().unwrap().zeta.contains("a.csv"));
    write(dir.path(), "analyzer.json", r#"{"sourceFunctions": ["x"], "sinkFunctions": ["x"]}"#);
    assert!(matches!(load_repository(dir.path()), Err(IngestError::Config(_))));
}

#[test]
fn manifest_round_trip_is_idempotent() {
    let text = std::fs::read_to_string(fixture("motivating").join("depmap.json")).unwrap();
    let once = serde_json::to_string_pretty(&ManifestDoc::parse(&text).unwrap()).unwrap();
    let twice = serde_json::to_string_pretty(&ManifestDoc::parse(&once).unwrap()).unwrap();
    assert_eq!(once, twice);
}
