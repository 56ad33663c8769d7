//! Python bindings. Results cross the boundary as canonical JSON strings.

use std::path::Path;

use depmap_core::report::{report_timestamp, run_analysis_at};
use depmap_core::script::{analyze_source, AnalyzerConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn report_json(repo: &str, filter: Option<&str>, generated_at: Option<i64>) -> Result<String, String> {
    let at = match generated_at {
        Some(secs) => {
            chrono::DateTime::from_timestamp(secs, 0).ok_or_else(|| format!("timestamp {secs} out of range"))?
        }
        None => report_timestamp(),
    };
    run_analysis_at(Path::new(repo), filter, at).map(|r| r.to_canonical_json()).map_err(|e| e.to_string())
}

fn script_json(source: &str, name: &str) -> Result<String, String> {
    let an = analyze_source(source, &AnalyzerConfig::default(), name).map_err(|e| e.to_string())?;
    serde_json::to_string(&an).map_err(|e| e.to_string())
}

/// Dependency report for the repository at `repo` as JSON.
#[pyfunction]
#[pyo3(signature = (repo, filter=None, generated_at=None))]
fn analyze(py: Python<'_>, repo: &str, filter: Option<&str>, generated_at: Option<i64>) -> PyResult<String> {
    py.detach(|| report_json(repo, filter, generated_at)).map_err(PyValueError::new_err)
}

/// Analysis of one Python-like script as JSON.
#[pyfunction]
#[pyo3(signature = (source, name="script"))]
fn analyze_script(source: &str, name: &str) -> PyResult<String> {
    script_json(source, name).map_err(PyValueError::new_err)
}

#[pymodule]
fn depmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_script, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
