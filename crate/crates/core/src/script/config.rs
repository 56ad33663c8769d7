use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Function-name sets that give calls their meaning, plus the inlining depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct AnalyzerConfig {
    #[serde(rename = "sourceFunctions")]
    pub source_fns: BTreeSet<String>,
    #[serde(rename = "sinkFunctions")]
    pub sink_fns: BTreeSet<String>,
    #[serde(rename = "outputFunctions")]
    pub output_fns: BTreeSet<String>,
    pub inline_depth: usize,
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            source_fns: set(&["read_csv", "read_parquet", "read_json"]),
            sink_fns: set(&["fit", "fit_transform", "train"]),
            output_fns: set(&["to_csv", "to_parquet", "write"]),
            inline_depth: 3,
        }
    }
}

impl AnalyzerConfig {
    /// Checks that no name is in more than one set.
    pub fn validate(&self) -> Result<(), String> {
        let pairs = [
            ("sourceFunctions", &self.source_fns, "sinkFunctions", &self.sink_fns),
            ("sourceFunctions", &self.source_fns, "outputFunctions", &self.output_fns),
            ("sinkFunctions", &self.sink_fns, "outputFunctions", &self.output_fns),
        ];
        for (an, a, bn, b) in pairs {
            if let Some(x) = a.intersection(b).next() {
                return Err(format!("{x:?} appears in both {an} and {bn}"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: AnalyzerConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path` if it exists, otherwise returns the defaults.
    pub fn load_or_default(path: &Path) -> Result<Self, ConfigError> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(source) => return Err(ConfigError::Io { path: path.to_path_buf(), source }),
        };
        Self::from_json(&text).map_err(|message| ConfigError::Invalid { path: path.to_path_buf(), message })
    }

    pub fn is_source(&self, name: &str) -> bool {
        self.source_fns.contains(name)
    }

    pub fn is_sink(&self, name: &str) -> bool {
        self.sink_fns.contains(name)
    }

    pub fn is_output(&self, name: &str) -> bool {
        self.output_fns.contains(name)
    }
}
