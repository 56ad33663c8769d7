use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{analyze_graph, infer_transitive, GraphResult};
use crate::error::{AnalysisError, BenchError};
use crate::ingest::load_repository;
use crate::model::MappingSet;

use super::GroundTruth;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub model_id: String,
    pub avg_act_size: f64,
    pub no_act: usize,
    pub no_dep: usize,
    pub zeta: usize,
    pub t_ms: f64,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Engine output per graph from the last repetition.
    pub mappings: BTreeMap<String, MappingSet>,
}

impl BenchReport {
    pub fn all_correct(&self) -> bool {
        self.rows.iter().all(|r| r.correct)
    }

    pub fn max_ms(&self) -> f64 {
        self.rows.iter().map(|r| r.t_ms).fold(0.0, f64::max)
    }

    pub fn geo_mean_ms(&self) -> f64 {
        geometric_mean(self.rows.iter().map(|r| r.t_ms))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# wall-clock on this host ({} logical CPUs, {}-{}); compare orders of magnitude only\n",
            std::thread::available_parallelism().map_or(1, |n| n.get()),
            std::env::consts::OS,
            std::env::consts::ARCH,
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model_id", "avg_act_size", "no_act", "no_dep", "zeta", "t_ms", "correct"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.model_id.clone(),
                format!("{:.1}", r.avg_act_size),
                r.no_act.to_string(),
                r.no_dep.to_string(),
                r.zeta.to_string(),
                format!("{:.3}", r.t_ms),
                r.correct.to_string(),
            ])
            .expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
        let _ = std::fmt::Write::write_fmt(
            &mut out,
            format_args!("# geo_mean_ms={:.3} max_ms={:.3}\n", self.geo_mean_ms(), self.max_ms()),
        );
        out
    }
}

pub fn geometric_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v.max(f64::MIN_POSITIVE).ln(), n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).exp()
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Times each model's graph analysis plus the inter-graph inference on a
/// freshly loaded repository per repetition, and checks the final mappings
/// against `truth`. Graphs run sequentially unless `parallel` is set.
pub fn run_bench(
    dir: &Path,
    truth: &GroundTruth,
    repetitions: usize,
    parallel: bool,
) -> Result<BenchReport, BenchError> {
    let repetitions = repetitions.max(1);
    let mut per_graph: BTreeMap<String, Vec<Duration>> = BTreeMap::new();
    let mut mappings = BTreeMap::new();
    for _ in 0..repetitions {
        let repo = load_repository(dir).map_err(AnalysisError::from)?;
        let timed = |g: &crate::model::ActivityGraph| {
            let t0 = Instant::now();
            let r = analyze_graph(g, &repo.config);
            (g.id.clone(), r, t0.elapsed())
        };
        let results: Vec<_> = if parallel {
            repo.graphs.par_iter().map(timed).collect()
        } else {
            repo.graphs.iter().map(timed).collect()
        };
        let mut ok: BTreeMap<String, GraphResult> = BTreeMap::new();
        for (id, r, dt) in results {
            per_graph.entry(id.clone()).or_default().push(dt);
            if let Ok(r) = r {
                ok.insert(id, r);
            }
        }
        let t0 = Instant::now();
        let transitive = infer_transitive(&ok);
        let dt = t0.elapsed();
        for times in per_graph.values_mut() {
            *times.last_mut().expect("pushed above") += dt;
        }
        mappings = transitive.zeta;
    }
    let rows = per_graph
        .into_iter()
        .map(|(id, times)| {
            let got = mappings.get(&id);
            let planted = truth.graphs.get(&id);
            BenchRow {
                avg_act_size: planted.map_or(0.0, |p| p.avg_tokens),
                no_act: planted.map_or(0, |p| p.activities),
                no_dep: got.map_or(0, |m| m.iter().map(|(_, c)| c.iter_explicit().map_or(1, Iterator::count)).sum()),
                zeta: got.map_or(0, MappingSet::len),
                t_ms: median(times).as_secs_f64() * 1000.0,
                correct: matches!((got, planted), (Some(g), Some(p)) if *g == p.truth),
                model_id: id,
            }
        })
        .collect();
    Ok(BenchReport { rows, mappings })
}
