//! The dependency report: per-model initial sources in canonical JSON.

use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::engine::{analyze_repository, RepositoryAnalysis};
use crate::error::{GraphError, IngestError};
use crate::ingest::load_repository;
use crate::model::{ColumnSet, MappingSet, Repository};

// Struct fields are declared in alphabetical order, and every list is
// sorted, so serde output is canonical.

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyReport {
    /// Findings not tied to one model, such as graphs without a model.
    pub diagnostics: Vec<Diagnostic>,
    pub generated_at: String,
    pub models: Vec<ModelReport>,
    pub repo_root: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelReport {
    pub diagnostics: Vec<Diagnostic>,
    pub graph_id: String,
    pub model_activity_id: String,
    pub sources: Vec<SourceEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub columns: ColumnSet,
    pub symbol: String,
}

impl DependencyReport {
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Keeps only models whose graph id or model activity id equals `filter`.
    pub fn filtered(mut self, filter: Option<&str>) -> Self {
        if let Some(f) = filter {
            self.models.retain(|m| m.graph_id == f || m.model_activity_id == f);
        }
        self
    }
}

pub fn sources_of(m: &MappingSet) -> Vec<SourceEntry> {
    m.iter().map(|(s, c)| SourceEntry { columns: c.clone(), symbol: s.to_string() }).collect()
}

/// `SOURCE_DATE_EPOCH` when set and valid, otherwise the current time.
pub fn report_timestamp() -> DateTime<Utc> {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now)
}

pub fn build_report(repo: &Repository, analysis: &RepositoryAnalysis, generated_at: DateTime<Utc>) -> DependencyReport {
    let mut diagnostics = analysis.transitive.diagnostics.clone();
    let mut models = Vec::new();
    for (id, result) in &analysis.graphs {
        match result {
            Ok(r) => models.push(ModelReport {
                diagnostics: r.diagnostics.clone(),
                graph_id: id.clone(),
                model_activity_id: r.start.clone(),
                sources: sources_of(&analysis.transitive.zeta[id]),
            }),
            Err(e) => {
                let code = match e {
                    GraphError::NoModel(_) => DiagnosticCode::NoModel,
                    GraphError::AmbiguousStart { .. } => DiagnosticCode::AmbiguousStart,
                };
                diagnostics.push(Diagnostic::new(code, e.to_string()));
            }
        }
    }
    diagnostics.sort();
    let root = repo.root.canonicalize().unwrap_or_else(|_| repo.root.clone());
    DependencyReport {
        diagnostics,
        generated_at: generated_at.to_rfc3339_opts(SecondsFormat::Secs, true),
        models,
        repo_root: root.display().to_string(),
    }
}

/// Ingest, per-graph analysis and inter-graph inference, stamped with
/// [`report_timestamp`].
pub fn run_analysis(root: &Path, filter: Option<&str>) -> Result<DependencyReport, IngestError> {
    run_analysis_at(root, filter, report_timestamp())
}

pub fn run_analysis_at(
    root: &Path,
    filter: Option<&str>,
    generated_at: DateTime<Utc>,
) -> Result<DependencyReport, IngestError> {
    let repo = load_repository(root)?;
    Ok(report_for(&repo, generated_at).filtered(filter))
}

/// Analyzes an already loaded repository.
pub fn report_for(repo: &Repository, generated_at: DateTime<Utc>) -> DependencyReport {
    build_report(repo, &analyze_repository(repo), generated_at)
}
