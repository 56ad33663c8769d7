use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::diagnostics::{Diagnostic, DiagnosticCode};
use crate::error::GraphError;
use crate::model::{ActivityAnalysis, ActivityGraph, MappingSet};
use crate::script::AnalyzerConfig;

use super::activity::analyze_activity;

/// What a visit to an activity asks of it: the sources reaching its model
/// call, or the sources flowing into one symbol it writes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Demand {
    Model,
    Symbol(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphResult {
    pub graph_id: String,
    pub start: String,
    /// Sources not written inside the graph (`ζ`).
    pub zeta: MappingSet,
    /// Derived symbols traversed on the way back from the model.
    pub derived_seen: BTreeSet<String>,
    /// Symbols written by the model activity (`O_A`) with their sources.
    pub outputs: BTreeMap<String, MappingSet>,
    /// Every (activity, demand) pair processed, in visit order.
    pub visits: Vec<(String, Demand)>,
    pub diagnostics: Vec<Diagnostic>,
}

/// A graph whose activities have been analyzed, with reads, writes and the
/// start activity filled in.
#[derive(Clone, Debug)]
pub struct WiredGraph {
    pub graph: ActivityGraph,
    pub analyses: BTreeMap<String, ActivityAnalysis>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Analyzes every activity and records its reads and writes on the graph.
/// Activities whose artifact cannot be read are left out.
pub fn wire_graph(g: &ActivityGraph, config: &AnalyzerConfig) -> WiredGraph {
    let mut graph = g.clone();
    graph.reads.clear();
    graph.writes.clear();
    let mut analyses = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for a in &g.activities {
        match analyze_activity(a, config) {
            Ok(an) => {
                graph.reads.insert(a.id.clone(), an.reads.symbols().map(str::to_string).collect());
                graph.writes.insert(a.id.clone(), an.writes.keys().cloned().collect());
                diagnostics.extend(an.diagnostics.iter().cloned());
                analyses.insert(a.id.clone(), an.clone());
            }
            Err(reason) => diagnostics.push(
                Diagnostic::new(
                    DiagnosticCode::MissingArtifact,
                    format!("{}: {reason}; activity excluded", a.artifact_path.display()),
                )
                .for_activity(&a.id),
            ),
        }
    }
    graph.start = select_start(&graph, &analyses).ok();
    diagnostics.sort();
    diagnostics.dedup();
    WiredGraph { graph, analyses, diagnostics }
}

/// The model activity: the unique one flagged `model: true` in the manifest,
/// otherwise the unique one calling a sink function.
pub fn select_start(g: &ActivityGraph, analyses: &BTreeMap<String, ActivityAnalysis>) -> Result<String, GraphError> {
    let flagged: Vec<&str> = g
        .activities
        .iter()
        .filter(|a| a.model == Some(true) && analyses.contains_key(&a.id))
        .map(|a| a.id.as_str())
        .collect();
    let candidates = if flagged.is_empty() {
        g.activities
            .iter()
            .filter(|a| a.model != Some(false) && analyses.get(&a.id).is_some_and(|an| an.has_sink))
            .map(|a| a.id.as_str())
            .collect()
    } else {
        flagged
    };
    match candidates.as_slice() {
        [] => Err(GraphError::NoModel(g.id.clone())),
        [one] => Ok(one.to_string()),
        many => Err(GraphError::AmbiguousStart {
            graph: g.id.clone(),
            candidates: many.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Walks backwards from the model activity. Each popped activity contributes
/// the sources behind what was demanded of it; derived symbols enqueue their
/// producers, everything else joins `ζ`. A pair is processed at most once, so
/// cycles terminate once no new pair appears.
pub fn analyze_graph(g: &ActivityGraph, config: &AnalyzerConfig) -> Result<GraphResult, GraphError> {
    let wired = wire_graph(g, config);
    walk(&wired)
}

pub fn walk(wired: &WiredGraph) -> Result<GraphResult, GraphError> {
    let g = &wired.graph;
    let start = select_start(g, &wired.analyses)?;
    let mut zeta = MappingSet::new();
    let mut derived_seen = BTreeSet::new();
    let mut visits = Vec::new();
    let mut seen = BTreeSet::new();
    let mut fifo = VecDeque::new();
    let first = (start.clone(), Demand::Model);
    seen.insert(first.clone());
    fifo.push_back(first);
    while let Some((id, demand)) = fifo.pop_front() {
        let an = &wired.analyses[&id];
        let contribution = match &demand {
            Demand::Model => Some(&an.mapping),
            Demand::Symbol(s) => an.writes.get(s),
        };
        visits.push((id, demand));
        for (symbol, columns) in contribution.into_iter().flat_map(MappingSet::iter) {
            if g.derived(symbol) {
                derived_seen.insert(symbol.to_string());
                for producer in g.deps(symbol) {
                    let item = (producer.to_string(), Demand::Symbol(symbol.to_string()));
                    if seen.insert(item.clone()) {
                        fifo.push_back(item);
                    }
                }
            } else {
                zeta.insert(symbol, columns.clone());
            }
        }
    }
    Ok(GraphResult {
        graph_id: g.id.clone(),
        outputs: wired.analyses[&start].writes.clone(),
        start,
        zeta,
        derived_seen,
        visits,
        diagnostics: wired.diagnostics.clone(),
    })
}
