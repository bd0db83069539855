use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use repeater_opt::orchestrator::{self, Mode, RunManifest, RunResult};

/// Optimise repeater-chain hardware parameters from an INI manifest.
#[derive(Debug, Parser)]
#[command(name = "repeater-opt", version)]
struct Cli {
    /// Run manifest.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `[run] mode`.
    #[arg(long, value_parser = ["optimize", "sweep", "validate", "benchmark"])]
    mode: Option<String>,
    /// Overrides `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Overrides `[run] output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn manifest(cli: &Cli) -> Result<RunManifest, orchestrator::OrchestratorError> {
    let mut m = RunManifest::load(&cli.config)?;
    if let Some(mode) = &cli.mode {
        m.mode = mode.parse::<Mode>()?;
    }
    if let Some(seed) = cli.seed {
        m.seed = seed;
    }
    if let Some(out) = &cli.out {
        m.output = out.clone();
    }
    m.validate()?;
    Ok(m)
}

fn report(m: &RunManifest, result: &RunResult) {
    match result {
        RunResult::Optimization(h) => {
            if let Some(c) = h.best_cost() {
                println!("best cost {c}");
            }
        }
        RunResult::Validation(h, v) => {
            println!("reference cost {}", v.reference.cost);
            if let (Some(c), Some(gap)) = (h.best_cost(), v.relative_gap) {
                println!("best cost {c} (relative gap {gap:.4})");
            }
        }
        RunResult::Sweep(s) => {
            println!(
                "{} crossing at gene {} (bracket {} .. {})",
                s.parameter, s.crossing, s.interval.0, s.interval.1
            )
        }
        RunResult::Benchmark(b) => println!("final clean cost {}", b.final_clean_cost),
    }
    println!("outputs in {}", m.output.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let m = match manifest(&cli) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| orchestrator::run(&m)) {
        Ok(result) => {
            report(&m, &result);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
