//! Query activities: table and column extraction for a SQL subset and a
//! pipe-style (KQL-like) subset.
//!
//! Both parsers attribute every referenced column to the tables it may come
//! from. Qualified references go to the named table; unqualified ones go to
//! every table in scope. Join keys, filter, grouping and ordering columns all
//! count as reads.

pub mod lexer;
pub mod pipe;
pub mod sql;

use std::path::Path;

use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::error::SyntaxError;
use crate::model::{normalize_symbol, ActivityAnalysis, ColumnSet, MappingSet};

pub use pipe::parse_pipe;
pub use sql::parse_sql;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    Sql,
    Pipe,
}

impl Dialect {
    /// `.sql` selects SQL, `.kql` the pipe dialect.
    pub fn for_path(path: &Path) -> Option<Dialect> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "sql" => Some(Dialect::Sql),
            "kql" => Some(Dialect::Pipe),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryAst {
    pub dialect: Dialect,
    /// Table → referenced columns.
    pub reads: MappingSet,
    /// Table names in order of first appearance.
    pub tables: Vec<String>,
    /// Output column names of the final projection, or `All`.
    pub projection: ColumnSet,
    pub output_symbol: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_query(text: &str, dialect: Dialect) -> Result<QueryAst, SyntaxError> {
    match dialect {
        Dialect::Sql => parse_sql(text),
        Dialect::Pipe => parse_pipe(text),
    }
}

/// Turns a parsed query into an activity analysis. The written symbol is the
/// query's `INTO` target, else the declared outputs, else a synthetic
/// `<activity>:unknown-out`.
pub fn extract_sources(q: &QueryAst, declared_outputs: Option<&[String]>, activity: &str) -> ActivityAnalysis {
    let mapping = q.reads.clone();
    let mut diagnostics: Vec<Diagnostic> = q.diagnostics.iter().cloned().map(|d| d.for_activity(activity)).collect();
    let outputs: Vec<String> = match (&q.output_symbol, declared_outputs) {
        (Some(s), _) => vec![normalize_symbol(s)],
        (None, Some(d)) if !d.is_empty() => d.iter().map(|s| normalize_symbol(s)).collect(),
        _ => {
            let s = format!("{activity}:unknown-out");
            diagnostics.push(
                Diagnostic::new(DiagnosticCode::UnknownOutput, format!("query declares no output; recorded as {s}"))
                    .for_activity(activity),
            );
            vec![s]
        }
    };
    diagnostics.sort();
    diagnostics.dedup();
    ActivityAnalysis {
        mapping: mapping.clone(),
        reads: q.reads.clone(),
        writes: outputs.into_iter().map(|o| (o, mapping.clone())).collect(),
        has_sink: false,
        fallback: false,
        diagnostics,
    }
}

/// Parses and extracts in one step.
pub fn analyze_query(
    text: &str,
    dialect: Dialect,
    declared_outputs: Option<&[String]>,
    activity: &str,
) -> Result<ActivityAnalysis, SyntaxError> {
    Ok(extract_sources(&parse_query(text, dialect)?, declared_outputs, activity))
}

/// Accumulates table reads in order of appearance.
#[derive(Default)]
pub(crate) struct ReadSet {
    pub reads: MappingSet,
    pub tables: Vec<String>,
}

impl ReadSet {
    pub fn touch(&mut self, table: &str) {
        self.reads.insert(table, ColumnSet::empty());
        if !self.tables.iter().any(|t| t == table) {
            self.tables.push(table.to_string());
        }
    }

    pub fn column(&mut self, table: &str, column: &str) {
        self.reads.insert(table, ColumnSet::explicit([column]));
    }

    pub fn all(&mut self, table: &str) {
        self.reads.insert(table, ColumnSet::All);
    }
}
