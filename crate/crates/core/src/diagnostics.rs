use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    SyntaxError,
    Unanalyzable,
    DisjointProjection,
    UnknownInput,
    UnknownOutput,
    MissingArtifact,
    InputMismatch,
    OutputMismatch,
    NestedSubquery,
    UnresolvedQualifier,
    AmbiguousProducer,
    NoModel,
    AmbiguousStart,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::SyntaxError => "syntax-error",
            DiagnosticCode::Unanalyzable => "unanalyzable",
            DiagnosticCode::DisjointProjection => "disjoint-projection",
            DiagnosticCode::UnknownInput => "unknown-input",
            DiagnosticCode::UnknownOutput => "unknown-output",
            DiagnosticCode::MissingArtifact => "missing-artifact",
            DiagnosticCode::InputMismatch => "input-mismatch",
            DiagnosticCode::OutputMismatch => "output-mismatch",
            DiagnosticCode::NestedSubquery => "nested-subquery",
            DiagnosticCode::UnresolvedQualifier => "unresolved-qualifier",
            DiagnosticCode::AmbiguousProducer => "ambiguous-producer",
            DiagnosticCode::NoModel => "no-model",
            DiagnosticCode::AmbiguousStart => "ambiguous-start",
        }
    }
}

/// A non-fatal finding attached to an activity, graph or report.
// Fields are declared in serialized key order so reports stay canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub activity: Option<String>,
    pub code: DiagnosticCode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub line: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self { activity: None, code, column: None, line: None, message: message.into() }
    }

    pub fn for_activity(mut self, activity: impl Into<String>) -> Self {
        self.activity = Some(activity.into());
        self
    }

    pub fn at(mut self, line: usize, column: usize) -> Self {
        self.line = Some(line);
        self.column = Some(column);
        self
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.code.as_str())?;
        if let Some(a) = &self.activity {
            write!(f, " {a}")?;
        }
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, ":{l}:{c}")?,
            (Some(l), None) => write!(f, ":{l}")?,
            _ => {}
        }
        write!(f, " {}", self.message)
    }
}
