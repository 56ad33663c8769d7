use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::BenchError;
use crate::ingest::{ActivityDoc, GraphDoc, ManifestDoc, MANIFEST_FILE, SCHEMA_VERSION};
use crate::model::{ActivityKind, ColumnSet, MappingSet};

use super::{token_count, BenchSpec};

/// What the generator planted in one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedGraph {
    pub id: String,
    pub activities: usize,
    /// Mean whitespace-token count over the graph's artifacts.
    pub avg_tokens: f64,
    /// The graph whose model output this graph's model reads, if any.
    pub consumes: Option<String>,
    /// Sources read inside this graph.
    pub own: MappingSet,
    /// The expected final mapping after inter-graph inference.
    pub truth: MappingSet,
}

impl PlantedGraph {
    /// Column-level dependency count of the final mapping.
    pub fn deps(&self) -> usize {
        self.truth.iter().map(|(_, c)| c.iter_explicit().map_or(1, Iterator::count)).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pub graphs: BTreeMap<String, PlantedGraph>,
}

struct Source {
    symbol: String,
    columns: Vec<String>,
    activity: usize,
}

/// Draws `n` sizes whose log-offsets are centred, so their geometric mean
/// matches `mean` up to rounding.
fn sizes(rng: &mut ChaCha8Rng, n: usize, mean: usize, spread: f64) -> Vec<usize> {
    let normal = Normal::new(0.0, spread.max(f64::MIN_POSITIVE)).expect("finite deviation");
    let offsets: Vec<f64> = (0..n).map(|_| if spread > 0.0 { normal.sample(rng) } else { 0.0 }).collect();
    let centre = offsets.iter().sum::<f64>() / n as f64;
    offsets.iter().map(|o| ((mean as f64) * (o - centre).exp()).round().max(1.0) as usize).collect()
}

/// Writes a manifest plus artifacts under `dir` and returns the dependency
/// map they must produce.
pub fn generate_repo(spec: &BenchSpec, dir: &Path) -> Result<GroundTruth, BenchError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_graphs;
    let acts = sizes(&mut rng, n, spec.activities_per_graph, spec.spread);
    let deps = sizes(&mut rng, n, spec.deps_per_graph, spec.spread);
    let tokens = sizes(&mut rng, n, spec.avg_activity_tokens, spec.spread);

    let n_cross = ((spec.cross_graph_fraction * n as f64).round() as usize).min(n - 1);
    let mut candidates: Vec<usize> = (1..n).collect();
    candidates.shuffle(&mut rng);
    let consumers: BTreeSet<usize> = candidates.iter().take(n_cross).copied().collect();

    let write = |rel: &str, text: &str| -> Result<(), BenchError> {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| BenchError::Io { path: parent.to_path_buf(), source })?;
        }
        std::fs::write(&path, text).map_err(|source| BenchError::Io { path, source })
    };

    let mut truth = GroundTruth::default();
    let mut graph_docs = Vec::new();
    for i in 0..n {
        let gid = format!("m{i:02}");
        let k = acts[i];
        let target = deps[i];
        let upstream = consumers.contains(&i).then(|| pick_producer(&mut rng, &truth, i, target));
        let query_first = k >= 2 && rng.gen_bool(0.5);
        let z = rng.gen_range(1..=target.min(16));
        let mut sources: Vec<Source> = (0..z)
            .map(|s| {
                let activity = if s == 0 { 0 } else { rng.gen_range(0..k) };
                let symbol =
                    if activity == 0 && query_first { format!("{gid}_t{s}") } else { format!("{gid}_s{s}.csv") };
                Source { symbol, columns: Vec::new(), activity }
            })
            .collect();
        // Join keys and the upstream mapping count towards the final total.
        let keys = sources.iter().filter(|s| s.activity == 0).count();
        let keys = if query_first && keys > 1 { keys } else { 0 };
        let inherited = upstream.as_ref().map_or(0, |u| truth.graphs[u].deps());
        let d = target.saturating_sub(keys + inherited).max(z);
        for c in 0..d {
            let s = if c < z { c } else { rng.gen_range(0..z) };
            sources[s].columns.push(format!("c{c}"));
        }

        let mut own = MappingSet::new();
        for s in &sources {
            own.insert(&s.symbol, ColumnSet::explicit(s.columns.iter().cloned()));
        }

        let mut activity_docs = Vec::new();
        let mut total_tokens = 0usize;
        for j in 0..k {
            let mine: Vec<&Source> = sources.iter().filter(|s| s.activity == j).collect();
            let is_model = j == k - 1;
            let mid_in = (j > 0).then(|| format!("{gid}_mid{}.csv", j - 1));
            let out = if is_model { format!("{gid}_out.csv") } else { format!("{gid}_mid{j}.csv") };
            let consumed = if is_model { upstream.as_ref().map(|u| format!("{u}_out.csv")) } else { None };
            let (rel, text, kind) = if j == 0 && query_first {
                if mine.len() > 1 {
                    for s in &mine {
                        own.insert(&s.symbol, ColumnSet::explicit(["id"]));
                    }
                }
                (format!("{gid}/a{j}.sql"), query_text(&mine, &out, tokens[i]), ActivityKind::Query)
            } else {
                let text = script_text(&mine, mid_in.as_deref(), consumed.as_deref(), &out, is_model, tokens[i], j);
                (format!("{gid}/a{j}.py"), text, ActivityKind::Script)
            };
            total_tokens += token_count(&text);
            write(&rel, &text)?;
            let mut inputs: Vec<String> = mine.iter().map(|s| s.symbol.clone()).collect();
            inputs.extend(mid_in);
            inputs.extend(consumed);
            inputs.sort();
            activity_docs.push(ActivityDoc {
                id: format!("a{j}"),
                kind,
                path: rel,
                inputs: Some(inputs),
                outputs: Some(vec![out]),
                model: None,
            });
        }
        graph_docs.push(GraphDoc { id: gid.clone(), activities: activity_docs });

        let mut full = own.clone();
        if let Some(u) = &upstream {
            full.join_with(&truth.graphs[u].truth);
        }
        truth.graphs.insert(
            gid.clone(),
            PlantedGraph {
                id: gid,
                activities: k,
                avg_tokens: total_tokens as f64 / k as f64,
                consumes: upstream,
                own,
                truth: full,
            },
        );
    }

    let doc = ManifestDoc { schema_version: SCHEMA_VERSION, graphs: graph_docs };
    let mut manifest = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    manifest.push('\n');
    write(MANIFEST_FILE, &manifest)?;
    Ok(truth)
}

/// An earlier graph whose final mapping fits in `budget`, else the smallest.
fn pick_producer(rng: &mut ChaCha8Rng, truth: &GroundTruth, before: usize, budget: usize) -> String {
    let earlier: Vec<&PlantedGraph> = (0..before).map(|p| &truth.graphs[&format!("m{p:02}")]).collect();
    let fitting: Vec<&&PlantedGraph> = earlier.iter().filter(|g| g.deps() < budget).collect();
    match fitting.choose(rng) {
        Some(g) => g.id.clone(),
        None => earlier.iter().min_by_key(|g| g.deps()).expect("consumers have predecessors").id.clone(),
    }
}

fn quoted_list(columns: &[String]) -> String {
    columns.iter().map(|c| format!("\"{c}\"")).collect::<Vec<_>>().join(", ")
}

/// Constant-only statements that never touch a data source.
fn script_padding(prefix: &str, budget: usize) -> String {
    let mut out = String::new();
    let mut used = 0;
    let mut n = 0usize;
    while used < budget {
        let v = format!("{prefix}{n}");
        let stmt = match n % 40 {
            13 => format!("if {v} > {n}:\n    {v} = {v} - 1\nelse:\n    {v} = {v} + 1\n"),
            29 => format!("while {v} > 1:\n    {v} = {v} - 2\n"),
            37 => format!("def {v}_f(x):\n    return x * {n}\n{v} = {v}_f({n})\n"),
            _ => format!("{v} = {n} * 3 + {}\n", n % 7),
        };
        let stmt = if n % 40 == 13 || n % 40 == 29 { format!("{v} = {n}\n{stmt}") } else { stmt };
        used += token_count(&stmt);
        out.push_str(&stmt);
        n += 1;
    }
    out
}

fn script_text(
    sources: &[&Source],
    mid_in: Option<&str>,
    consumed: Option<&str>,
    out: &str,
    is_model: bool,
    target_tokens: usize,
    j: usize,
) -> String {
    let mut core = String::new();
    let mut acc_started = false;
    let mut extend = |core: &mut String, var: &str| {
        if acc_started {
            let _ = writeln!(core, "acc = acc.merge({var})");
        } else {
            let _ = writeln!(core, "acc = {var}");
            acc_started = true;
        }
    };
    if let Some(m) = mid_in {
        let _ = writeln!(core, "frame = pd.read_csv(\"{m}\")");
        extend(&mut core, "frame");
    }
    for (n, s) in sources.iter().enumerate() {
        let _ = writeln!(core, "raw_{n} = pd.read_csv(\"{}\")", s.symbol);
        let _ = writeln!(core, "sel_{n} = raw_{n}[[{}]]", quoted_list(&s.columns));
        extend(&mut core, &format!("sel_{n}"));
    }
    if let Some(c) = consumed {
        let _ = writeln!(core, "upstream = pd.read_csv(\"{c}\")");
        extend(&mut core, "upstream");
    }
    if is_model {
        let _ = writeln!(core, "estimator = GradientBoostingClassifier(n_estimators=100)");
        let _ = writeln!(core, "estimator.fit(acc)");
        let _ = writeln!(core, "scores = estimator.predict(acc)");
        let _ = writeln!(core, "scores.to_csv(\"{out}\")");
    } else {
        let _ = writeln!(core, "acc.to_csv(\"{out}\")");
    }
    let header = "import pandas as pd\nfrom sklearn.ensemble import GradientBoostingClassifier\n";
    let budget = target_tokens.saturating_sub(token_count(header) + token_count(&core));
    let before = script_padding(&format!("p{j}_"), budget / 2);
    let after = script_padding(&format!("q{j}_"), budget.saturating_sub(token_count(&before)));
    format!("{header}{before}{core}{after}")
}

fn query_text(sources: &[&Source], out: &str, target_tokens: usize) -> String {
    let mut select = Vec::new();
    let mut from = String::new();
    for (n, s) in sources.iter().enumerate() {
        select.extend(s.columns.iter().map(|c| format!("a{n}.{c}")));
        if n == 0 {
            let _ = write!(from, "FROM {} AS a0", s.symbol);
        } else {
            let _ = write!(from, "\nJOIN {} AS a{n} ON a0.id = a{n}.id", s.symbol);
        }
    }
    let mut text = format!("SELECT {}\nINTO {out}\n{from}\nWHERE 1 = 1", select.join(", "));
    let mut n = 2;
    while token_count(&text) < target_tokens {
        let _ = write!(text, "{}AND {n} = {n}", if n % 8 == 0 { "\n  " } else { " " });
        n += 1;
    }
    text.push('\n');
    text
}
