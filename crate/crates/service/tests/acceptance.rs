//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Thresholds are the constants below.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::DateTime;
use depmap_core::bench::{generate_repo, geometric_mean, run_bench, BenchSpec};
use depmap_core::engine::{analyze_graph, analyze_repository, infer_transitive, infer_transitive_ordered, GraphResult};
use depmap_core::ingest::load_repository;
use depmap_core::model::{ColumnSet, MappingSet};
use depmap_core::script::{
    analyze_script, analyze_source, build_cfg, inline_functions, parse_script, transfer, AnalyzerConfig, ScriptAnalyzer,
};
use depmap_service::{router, AppState, ServiceConfig, CACHE_HEADER, ROUTE};
use http_body_util::BodyExt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle::{covers, random_program, run_concrete};
use support::scripts::{expected_train_script, LOOPS, TRAIN_SCRIPT};
use support::strategies::{mapping, state, statement};
use support::topology::{exhaustive_rule, random_topology};
use tower::ServiceExt;

const MOTIVATING_BUDGET: Duration = Duration::from_secs(1);
const SOUNDNESS_PROGRAMS: usize = 500;
const SOUNDNESS_BUDGET: Duration = Duration::from_secs(60);
const LATTICE_CASES: u32 = 1000;
const RANDOM_TOPOLOGIES: usize = 20;
const ORDERS_PER_TOPOLOGY: usize = 10;
const BENCH_SEED: u64 = 1;
const BENCH_REPETITIONS: usize = 3;
const PER_MODEL_LIMIT_MS: f64 = 1000.0;
const REFERENCE_GEO_MEAN_MS: f64 = 107.8;
const GEO_MEAN_FACTOR: f64 = 10.0;
/// Corpus shape targets as (value, relative tolerance).
const SHAPE_ACTIVITIES: (f64, f64) = (4.8, 0.15);
const SHAPE_DEPS: (f64, f64) = (40.8, 0.15);
const SHAPE_TOKENS: (f64, f64) = (4630.0, 0.10);
const SHAPE_CROSS: (f64, f64) = (0.2, 0.25);
const EPOCH: i64 = 1_700_000_000;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn cols(names: &[&str]) -> ColumnSet {
    ColumnSet::explicit(names.iter().copied())
}

fn mapping_of(entries: &[(&str, ColumnSet)]) -> MappingSet {
    entries.iter().map(|(s, c)| (*s, c.clone())).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn motivating_example() -> Check {
    let t0 = Instant::now();
    let repo = load_repository(&fixture("motivating")).map_err(|e| e.to_string())?;
    let an = analyze_repository(&repo);
    let elapsed = t0.elapsed();
    let a1 = an.graphs["A1"].as_ref().map_err(|e| e.to_string())?;
    let a1_want = mapping_of(&[
        ("file2.csv", cols(&["target"])),
        ("table1", cols(&["id", "loc", "name"])),
        ("table2", cols(&["id", "loc", "name"])),
    ]);
    ensure(a1.zeta == a1_want, || format!("A1 zeta {} != {}", a1.zeta, a1_want))?;
    let a2_local = &an.graphs["A2"].as_ref().map_err(|e| e.to_string())?.zeta;
    let a2_own = mapping_of(&[("file2.csv", cols(&["name"]))]);
    let a2_want = a1_want.join(&a2_own);
    let a2 = &an.transitive.zeta["A2"];
    ensure(*a2 == a2_want, || format!("A2 final zeta {a2} != {a2_want}"))?;
    ensure(a2_local.contains("output.csv") && !a2.contains("output.csv"), || {
        format!("A2 local {a2_local} should name output.csv, final should not")
    })?;
    ensure(elapsed < MOTIVATING_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("A1={a1_want} A2={a2} in {elapsed:?}"))
}

fn rule_goldens() -> Check {
    let cfg = build_cfg(&parse_script(TRAIN_SCRIPT).map_err(|e| e.to_string())?);
    let an = analyze_script(&cfg, &AnalyzerConfig::default()).map_err(|e| e.to_string())?;
    let want = expected_train_script();
    ensure(an.mapping == want, || format!("mapping {} != {want}", an.mapping))?;
    let writes: BTreeMap<String, MappingSet> = [("output.csv".to_string(), want.clone())].into_iter().collect();
    ensure(an.writes == writes, || format!("writes {:?}", an.writes))?;
    ensure(an.has_sink, || "no sink detected".into())?;
    Ok(format!("mapping={} writes=output.csv has_sink", an.mapping))
}

fn soundness() -> Check {
    let config = AnalyzerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let t0 = Instant::now();
    let mut reaching = 0;
    for i in 0..SOUNDNESS_PROGRAMS {
        let p = random_program(&mut rng);
        let text = p.render();
        let stat = analyze_source(&text, &config, "gen").map_err(|e| format!("program {i}: {e}"))?;
        let conc = run_concrete(&p);
        reaching += usize::from(!conc.mapping.is_empty());
        covers(&stat, &conc).map_err(|m| format!("program {i}: {m}\n{text}"))?;
    }
    let elapsed = t0.elapsed();
    ensure(elapsed < SOUNDNESS_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{SOUNDNESS_PROGRAMS}/{SOUNDNESS_PROGRAMS} covered ({reaching} reach a source) in {elapsed:?}"))
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases: LATTICE_CASES, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn fail<T: std::fmt::Debug>(law: &str, e: proptest::test_runner::TestError<T>) -> String {
    format!("{law}: {e}")
}

fn lattice_laws() -> Check {
    runner()
        .run(&(mapping(), mapping()), |(a, b)| {
            prop_assert_eq!(a.join(&b), b.join(&a));
            Ok(())
        })
        .map_err(|e| fail("commutativity", e))?;
    runner()
        .run(&(mapping(), mapping(), mapping()), |(a, b, c)| {
            prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
            Ok(())
        })
        .map_err(|e| fail("associativity", e))?;
    runner()
        .run(&mapping(), |a| {
            prop_assert_eq!(a.join(&a), a);
            Ok(())
        })
        .map_err(|e| fail("idempotence", e))?;
    let config = AnalyzerConfig::default();
    runner()
        .run(&(statement(), state(), state()), |(src, lo, extra)| {
            let ast = parse_script(&src).expect("generated statements parse");
            let stmt = &ast.statements[0].kind;
            let hi = lo.join(&extra);
            let (s_lo, fx_lo) = transfer(stmt, &lo, &config, "p");
            let (s_hi, fx_hi) = transfer(stmt, &hi, &config, "p");
            prop_assert!(s_lo.leq(&s_hi) && fx_lo.leq(&fx_hi), "{}", src);
            Ok(())
        })
        .map_err(|e| fail("transfer monotonicity", e))?;
    Ok(format!("4 laws x {LATTICE_CASES} cases"))
}

fn fixpoints() -> Check {
    let cases = [
        ("cycle2", mapping_of(&[("base.csv", cols(&["a", "b"])), ("labels.csv", cols(&["y"]))])),
        ("cycle3", mapping_of(&[("events", cols(&["amount", "id"])), ("geo.csv", cols(&["region"]))])),
    ];
    for (name, want) in &cases {
        let repo = load_repository(&fixture(name)).map_err(|e| e.to_string())?;
        let r = analyze_graph(&repo.graphs[0], &repo.config).map_err(|e| e.to_string())?;
        ensure(r.zeta == *want, || format!("{name}: {} != {want}", r.zeta))?;
    }
    let config = AnalyzerConfig::default();
    for (i, src) in LOOPS.iter().enumerate() {
        let cfg = build_cfg(&inline_functions(&parse_script(src).map_err(|e| e.to_string())?, config.inline_depth));
        let an = ScriptAnalyzer::new(&config, "loop");
        let fp = an.fixpoint(&cfg).map_err(|e| e.to_string())?;
        ensure(an.is_stable(&cfg, &fp.states), || format!("loop {i} not stable"))?;
        let again = an.reapply(&cfg, fp.states.clone()).map_err(|e| e.to_string())?;
        ensure(again.states == fp.states && again.analysis == fp.analysis, || format!("loop {i} moved"))?;
    }
    Ok(format!("2 cyclic graphs, {} loop scripts stable", LOOPS.len()))
}

fn confluence() -> Check {
    let repo = load_repository(&fixture("chain3")).map_err(|e| e.to_string())?;
    let chain: BTreeMap<String, GraphResult> = repo
        .graphs
        .iter()
        .map(|g| (g.id.clone(), analyze_graph(g, &repo.config).expect("chain graphs analyze")))
        .collect();
    let want =
        mapping_of(&[("raw1.csv", cols(&["x1", "y1"])), ("raw2.csv", cols(&["x2"])), ("raw3", cols(&["id", "x3"]))]);
    let base = infer_transitive(&chain);
    ensure(base.zeta["G3"] == want, || format!("G3 {} != {want}", base.zeta["G3"]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut topologies = vec![chain];
    topologies.extend((0..RANDOM_TOPOLOGIES).map(|i| random_topology(&mut rng, i % 2 == 0)));
    for (case, rs) in topologies.iter().enumerate() {
        let base = infer_transitive(rs);
        if case > 0 && case % 2 == 1 {
            ensure(base.zeta == exhaustive_rule(rs), || format!("topology {case}: differs from the rule"))?;
        }
        let mut ids: Vec<&str> = rs.keys().map(String::as_str).collect();
        for _ in 0..ORDERS_PER_TOPOLOGY {
            ids.shuffle(&mut rng);
            ensure(infer_transitive_ordered(rs, &ids) == base, || format!("topology {case}: order {ids:?} differs"))?;
        }
    }
    Ok(format!("chain + {RANDOM_TOPOLOGIES} topologies x {ORDERS_PER_TOPOLOGY} orders"))
}

fn within(name: &str, got: f64, (target, rel): (f64, f64)) -> Result<(), String> {
    ensure((got - target).abs() <= target * rel, || format!("{name} {got:.2} not within {rel} of {target}"))
}

fn performance() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = BenchSpec::desk_scale(BENCH_SEED);
    let truth = generate_repo(&spec, dir.path()).map_err(|e| e.to_string())?;
    let report = run_bench(dir.path(), &truth, BENCH_REPETITIONS, false).map_err(|e| e.to_string())?;
    ensure(report.rows.len() == 31, || format!("{} models", report.rows.len()))?;
    let planted = truth.graphs.values();
    let acts = geometric_mean(planted.clone().map(|g| g.activities as f64));
    let deps = geometric_mean(planted.clone().map(|g| g.deps() as f64));
    let tokens = geometric_mean(planted.clone().map(|g| g.avg_tokens));
    within("activities", acts, SHAPE_ACTIVITIES)?;
    within("deps", deps, SHAPE_DEPS)?;
    within("tokens", tokens, SHAPE_TOKENS)?;
    let cross = planted.clone().filter(|g| g.consumes.is_some()).count() as f64 / 31.0;
    within("cross-graph share", cross, SHAPE_CROSS)?;
    let wrong: Vec<&str> = report.rows.iter().filter(|r| !r.correct).map(|r| r.model_id.as_str()).collect();
    ensure(wrong.is_empty(), || format!("incorrect models {wrong:?}"))?;
    let (geo, max) = (report.geo_mean_ms(), report.max_ms());
    ensure(max < PER_MODEL_LIMIT_MS, || format!("slowest model {max:.1} ms"))?;
    let (lo, hi) = (REFERENCE_GEO_MEAN_MS / GEO_MEAN_FACTOR, REFERENCE_GEO_MEAN_MS * GEO_MEAN_FACTOR);
    ensure((lo..=hi).contains(&geo), || format!("geo-mean {geo:.1} ms outside [{lo:.2}, {hi:.0}]"))?;
    Ok(format!(
        "31/31 exact, geo-mean {geo:.1} ms, max {max:.1} ms \
         (shape: {acts:.1} activities, {deps:.1} deps, {tokens:.0} tokens, {cross:.2} cross)"
    ))
}

async fn post(app: &axum::Router, body: &str) -> (StatusCode, Option<String>, Vec<u8>) {
    let req =
        Request::post(ROUTE).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let cache = resp.headers().get(CACHE_HEADER).map(|v| v.to_str().unwrap().to_string());
    (status, cache, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        let dest = to.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_dir(&p, &dest);
        } else {
            std::fs::copy(&p, &dest).unwrap();
        }
    }
}

fn interface_contract() -> Check {
    let root = fixture("motivating");
    let cli = Command::new(env!("CARGO_BIN_EXE_depmap"))
        .args(["analyze", "--repo"])
        .arg(&root)
        .env("SOURCE_DATE_EPOCH", EPOCH.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(cli.status.success(), || String::from_utf8_lossy(&cli.stderr).into_owned())?;

    let config = ServiceConfig { cache_ttl: Duration::from_secs(600), fixed_time: DateTime::from_timestamp(EPOCH, 0) };
    let app = router(AppState::new(config));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let body = format!(r#"{{"repoPath": {}}}"#, serde_json::to_string(&root).unwrap());
        let (status, _, http) = post(&app, &body).await;
        ensure(status == StatusCode::OK, || format!("fixture returned {status}"))?;
        ensure(http == cli.stdout, || "CLI and HTTP reports differ".into())?;

        for bad in ["{", "[]", r#"{"filter": 1}"#, r#"{"repoPath": "x", "extra": 1}"#] {
            let (status, _, _) = post(&app, bad).await;
            ensure(status == StatusCode::BAD_REQUEST, || format!("{bad} returned {status}"))?;
        }
        let empty = tempfile::tempdir().unwrap();
        let body = format!(r#"{{"repoPath": {}}}"#, serde_json::to_string(empty.path()).unwrap());
        let (status, _, _) = post(&app, &body).await;
        ensure(status == StatusCode::UNPROCESSABLE_ENTITY, || format!("missing manifest returned {status}"))?;

        let work = tempfile::tempdir().unwrap();
        copy_dir(&root, work.path());
        let body = format!(r#"{{"repoPath": {}, "filter": "A2"}}"#, serde_json::to_string(work.path()).unwrap());
        let (_, first, before) = post(&app, &body).await;
        let (_, second, cached) = post(&app, &body).await;
        ensure(first.as_deref() == Some("miss") && second.as_deref() == Some("hit") && before == cached, || {
            format!("expected miss then identical hit, got {first:?} {second:?}")
        })?;
        let script = work.path().join("Train2.py");
        let text = std::fs::read_to_string(&script).unwrap();
        ensure(text.contains(r#"[["name"]]"#), || "Train2.py projection changed upstream".into())?;
        std::fs::write(&script, text.replace(r#"[["name"]]"#, r#"[["age"]]"#)).unwrap();
        let (_, third, after) = post(&app, &body).await;
        ensure(third.as_deref() == Some("miss") && after != before, || {
            format!("edit not picked up: cache={third:?} changed={}", after != before)
        })?;
        Ok("CLI == HTTP bytes, 400/422/200, cache miss/hit/miss on edit".to_string())
    })
}

/// Writes past the test harness capture so the lines show in plain runs.
fn report(line: std::fmt::Arguments<'_>) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        ("motivating example end to end", motivating_example),
        ("rule-level goldens", rule_goldens),
        ("soundness vs concrete taint oracle", soundness),
        ("lattice laws", lattice_laws),
        ("fixpoint and termination", fixpoints),
        ("transitive confluence", confluence),
        ("performance at desk scale", performance),
        ("interface contract", interface_contract),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => report(format_args!("criterion {} ({name}): PASS {detail}", i + 1)),
            Err(detail) => {
                report(format_args!("criterion {} ({name}): FAIL {detail}", i + 1));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
