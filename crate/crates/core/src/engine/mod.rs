//! Per-graph backward traversal from the model activity and the inter-graph
//! inference that resolves symbols produced by other graphs.

pub mod activity;
pub mod graph;
pub mod transitive;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use activity::analyze_activity;
pub use graph::{analyze_graph, select_start, walk, wire_graph, Demand, GraphResult, WiredGraph};
pub use transitive::{infer_transitive, infer_transitive_ordered, Transitive};

use crate::error::GraphError;
use crate::model::{ColumnSet, MappingSet, Repository};

#[derive(Clone, Debug)]
pub struct RepositoryAnalysis {
    /// Graph id → its traversal, or why it has no model.
    pub graphs: BTreeMap<String, Result<GraphResult, GraphError>>,
    pub transitive: Transitive,
}

impl RepositoryAnalysis {
    /// `O_A` per analyzed graph: each symbol its model writes, with all of
    /// its columns.
    pub fn model_outputs(&self) -> BTreeMap<String, MappingSet> {
        self.graphs
            .iter()
            .filter_map(|(id, r)| {
                let r = r.as_ref().ok()?;
                Some((id.clone(), r.outputs.keys().map(|o| (o.as_str(), ColumnSet::All)).collect()))
            })
            .collect()
    }
}

/// Analyzes every graph in parallel, then runs the inter-graph inference.
pub fn analyze_repository(repo: &Repository) -> RepositoryAnalysis {
    let graphs: BTreeMap<String, Result<GraphResult, GraphError>> =
        repo.graphs.par_iter().map(|g| (g.id.clone(), analyze_graph(g, &repo.config))).collect();
    let ok: BTreeMap<String, GraphResult> =
        graphs.iter().filter_map(|(id, r)| Some((id.clone(), r.as_ref().ok()?.clone()))).collect();
    let transitive = infer_transitive(&ok);
    RepositoryAnalysis { graphs, transitive }
}
