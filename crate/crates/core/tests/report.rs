use std::path::PathBuf;

use chrono::DateTime;
use depmap_core::model::ColumnSet;
use depmap_core::report::{run_analysis_at, DependencyReport};

fn motivating() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/motivating")
}

fn at(filter: Option<&str>) -> DependencyReport {
    run_analysis_at(&motivating(), filter, DateTime::from_timestamp(1_700_000_000, 0).unwrap()).unwrap()
}

#[test]
fn unfiltered_report_lists_both_models() {
    let r = at(None);
    assert_eq!(r.generated_at, "2023-11-14T22:13:20Z");
    let ids: Vec<(&str, &str)> = r.models.iter().map(|m| (m.graph_id.as_str(), m.model_activity_id.as_str())).collect();
    assert_eq!(ids, vec![("A1", "train1"), ("A2", "train2")]);
    let a2 = &r.models[1];
    let symbols: Vec<&str> = a2.sources.iter().map(|s| s.symbol.as_str()).collect();
    assert_eq!(symbols, vec!["file2.csv", "table1", "table2"]);
    assert_eq!(a2.sources[0].columns, ColumnSet::explicit(["name", "target"]));
}

#[test]
fn filters_match_graph_or_model_ids_exactly() {
    assert_eq!(at(Some("A1")).models.len(), 1);
    assert_eq!(at(Some("train2")).models[0].graph_id, "A2");
    assert!(at(Some("A")).models.is_empty());
}

#[test]
fn serialization_is_canonical() {
    let a = at(None).to_canonical_json();
    assert_eq!(a, at(None).to_canonical_json());
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", a);
    let back: DependencyReport = serde_json::from_str(&a).unwrap();
    assert_eq!(back, at(None));
}
