use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use depmap_core::bench::{generate_repo, run_bench, BenchSpec};
use depmap_core::report::run_analysis;
use depmap_service::{serve, ServiceConfig};

#[derive(Parser)]
#[command(name = "depmap", version, about = "Map ML models to the data sources they depend on")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a repository checkout and print its dependency report.
    Analyze {
        #[arg(long)]
        repo: PathBuf,
        /// Keep only the model whose graph id or model activity id matches.
        #[arg(long)]
        filter: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long, default_value_t = 300)]
        cache_ttl: u64,
    },
    /// Generate a synthetic corpus and time the engine on it.
    Bench {
        /// BenchSpec JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        /// Directory for the generated corpus (default: a fresh temp dir).
        #[arg(long)]
        workdir: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Analyze graphs concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("writing {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Analyze { repo, filter, out } => {
            let report = run_analysis(&repo, filter.as_deref()).map_err(|e| e.to_string())?;
            emit(out.as_ref(), &report.to_canonical_json())
        }
        Command::Serve { bind, cache_ttl } => {
            let config = ServiceConfig::from_env(Duration::from_secs(cache_ttl));
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(serve(&bind, config)).map_err(|e| format!("serving on {bind}: {e}"))
        }
        Command::Bench { spec, seed, repetitions, workdir, out, parallel } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| format!("reading {}: {e}", spec.display()))?;
            let mut spec = BenchSpec::from_json(&text).map_err(|e| e.to_string())?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let dir = workdir.unwrap_or_else(|| {
                std::env::temp_dir().join(format!("depmap-bench-{}-{}", spec.seed, std::process::id()))
            });
            if dir.exists() {
                std::fs::remove_dir_all(&dir).map_err(|e| format!("clearing {}: {e}", dir.display()))?;
            }
            let truth = generate_repo(&spec, &dir).map_err(|e| e.to_string())?;
            let report = run_bench(&dir, &truth, repetitions, parallel).map_err(|e| e.to_string())?;
            emit(out.as_ref(), &report.to_csv())?;
            if report.all_correct() {
                Ok(())
            } else {
                Err("engine output differs from the planted ground truth".into())
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
