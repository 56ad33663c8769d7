use std::collections::BTreeSet;

use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::error::ScriptError;
use crate::model::{Activity, ActivityAnalysis, ActivityKind, ColumnSet, MappingSet};
use crate::query::{analyze_query, Dialect};
use crate::script::{analyze_source, AnalyzerConfig};

/// Analyzes one activity, memoized on the activity. `Err` means the artifact
/// could not be read and the activity must be excluded.
pub fn analyze_activity<'a>(activity: &'a Activity, config: &AnalyzerConfig) -> &'a Result<ActivityAnalysis, String> {
    activity.cached_analysis(|| compute(activity, config))
}

fn compute(activity: &Activity, config: &AnalyzerConfig) -> Result<ActivityAnalysis, String> {
    let text = activity.content.as_ref().map_err(Clone::clone)?;
    let id = activity.id.as_str();
    let parsed = match activity.kind {
        ActivityKind::Script => analyze_source(text, config, id).map_err(|e| match e {
            ScriptError::Syntax(s) => Diagnostic::new(DiagnosticCode::SyntaxError, s.message).at(s.line, s.column),
            other => Diagnostic::new(DiagnosticCode::Unanalyzable, other.to_string()),
        }),
        ActivityKind::Query => match Dialect::for_path(&activity.artifact_path) {
            Some(d) => analyze_query(text, d, activity.declared_outputs.as_deref(), id)
                .map_err(|s| Diagnostic::new(DiagnosticCode::SyntaxError, s.message).at(s.line, s.column)),
            None => Err(Diagnostic::new(
                DiagnosticCode::Unanalyzable,
                format!("no query dialect for {}", activity.artifact_path.display()),
            )),
        },
    };
    let mut analysis = match parsed {
        Ok(a) => {
            let mut a = a;
            a.diagnostics.extend(mismatches(activity, &a));
            a
        }
        Err(d) => fallback(activity, d.for_activity(id)),
    };
    analysis.diagnostics.sort();
    analysis.diagnostics.dedup();
    Ok(analysis)
}

/// Declared inputs with every column, declared outputs carrying all of them.
pub fn fallback(activity: &Activity, cause: Diagnostic) -> ActivityAnalysis {
    let mapping: MappingSet = activity.declared_inputs.iter().flatten().map(|s| (s.as_str(), ColumnSet::All)).collect();
    let writes = activity.declared_outputs.iter().flatten().map(|o| (o.clone(), mapping.clone())).collect();
    let note = Diagnostic::new(
        DiagnosticCode::Unanalyzable,
        format!(
            "falling back to declared inputs {:?} with all columns",
            activity.declared_inputs.as_deref().unwrap_or_default()
        ),
    )
    .for_activity(&activity.id);
    ActivityAnalysis {
        reads: mapping.clone(),
        mapping,
        writes,
        has_sink: activity.model == Some(true),
        fallback: true,
        diagnostics: vec![cause, note],
    }
}

/// Symmetric difference between declared and analyzed reads and writes.
fn mismatches(activity: &Activity, analysis: &ActivityAnalysis) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let analyzed_in: BTreeSet<&str> = analysis.reads.symbols().collect();
    let analyzed_out: BTreeSet<&str> = analysis.writes.keys().map(String::as_str).collect();
    let checks = [
        (DiagnosticCode::InputMismatch, "inputs", &activity.declared_inputs, analyzed_in),
        (DiagnosticCode::OutputMismatch, "outputs", &activity.declared_outputs, analyzed_out),
    ];
    for (code, what, declared, analyzed) in checks {
        let Some(declared) = declared else { continue };
        let declared: BTreeSet<&str> = declared.iter().map(String::as_str).collect();
        let diff: Vec<&str> = declared.symmetric_difference(&analyzed).copied().collect();
        if !diff.is_empty() {
            out.push(
                Diagnostic::new(code, format!("declared and analyzed {what} differ on {diff:?}"))
                    .for_activity(&activity.id),
            );
        }
    }
    out
}
