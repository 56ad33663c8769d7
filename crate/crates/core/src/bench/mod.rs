//! Synthetic repositories with known dependency maps, and a timing harness
//! that reports per-model results in the shape of a model/size/latency table.

pub mod generate;
pub mod run;

use serde::{Deserialize, Serialize};

use crate::error::BenchError;

pub use generate::{generate_repo, GroundTruth, PlantedGraph};
pub use run::{geometric_mean, run_bench, spearman, BenchReport, BenchRow};

/// Corpus shape. Per-graph sizes are drawn log-normally around the given
/// means with log-scale deviation `spread`, then re-centred so the
/// corpus geometric means equal the targets before rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub n_graphs: usize,
    pub activities_per_graph: usize,
    pub avg_activity_tokens: usize,
    pub deps_per_graph: usize,
    pub cross_graph_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub spread: f64,
}

impl BenchSpec {
    /// 31 models, about 5 activities, 41 column dependencies and 4630
    /// tokens per activity, a fifth of them consuming another graph.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            n_graphs: 31,
            activities_per_graph: 5,
            avg_activity_tokens: 4630,
            deps_per_graph: 41,
            cross_graph_fraction: 0.2,
            seed,
            spread: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let counts = [
            ("n_graphs", self.n_graphs),
            ("activities_per_graph", self.activities_per_graph),
            ("avg_activity_tokens", self.avg_activity_tokens),
            ("deps_per_graph", self.deps_per_graph),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(BenchError::InvalidSpec(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.cross_graph_fraction) {
            return Err(BenchError::InvalidSpec("cross_graph_fraction must lie in [0, 1]".into()));
        }
        if !(0.0..=3.0).contains(&self.spread) {
            return Err(BenchError::InvalidSpec("spread must lie in [0, 3]".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let spec: BenchSpec = serde_json::from_str(text).map_err(|e| BenchError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Whitespace-delimited lexemes.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}
