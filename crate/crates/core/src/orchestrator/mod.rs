//! Configuration-driven runs: optimisation, validation against the Werner
//! closed form, single-parameter sweeps and optimizer benchmarks.

pub mod bench;
pub mod manifest;
pub mod optimize;
pub mod output;
pub mod sweep;

use std::path::Path;

use thiserror::Error;

use crate::benchmark::BenchmarkError;
use crate::cost::CostError;
use crate::ga::GaError;
use crate::model::{ModelError, Parameter};
use crate::sim::{NoiseMode, SimError};
use crate::werner::WernerError;

pub use bench::{run_benchmark, BenchmarkRun};
pub use manifest::{BenchmarkFunction, BenchmarkSettings, GaSettings, Metric, Mode, RunManifest, SweepSettings};
pub use optimize::{
    propagate_bounds, run_optimization, Evaluation, GeneLayout, OptimizationHistory, ValidationReport, GENE_CEILING,
};
pub use sweep::{sensitivity_sweep, SweepProbe, SweepResult};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Werner(#[from] WernerError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("stopped after {} generations: {source}", partial.generations.len())]
    Aborted {
        source: Box<OrchestratorError>,
        partial: Box<OptimizationHistory>,
    },
    #[error("response to {parameter} decreases near gene {at}")]
    NonMonotone { parameter: Parameter, at: f64 },
    #[error("{parameter} never reaches {threshold}; best response {best}")]
    Unreachable {
        parameter: Parameter,
        best: f64,
        threshold: f64,
    },
    #[error("incompatible chains: {0}")]
    Incompatible(String),
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum RunResult {
    Optimization(OptimizationHistory),
    Validation(OptimizationHistory, ValidationReport),
    Sweep(SweepResult),
    Benchmark(BenchmarkRun),
}

/// Runs the manifest's mode without writing anything. Validation always
/// uses the Werner noise model.
pub fn execute(manifest: &RunManifest) -> Result<RunResult, OrchestratorError> {
    match manifest.mode {
        Mode::Optimize => Ok(RunResult::Optimization(run_optimization(manifest)?)),
        Mode::Validate => {
            let mut m = manifest.clone();
            m.simulation.noise_mode = NoiseMode::Werner;
            let reference = optimize::reference_for(&m)?;
            let history = run_optimization(&m)?;
            let report = optimize::validation_report(reference, &history);
            Ok(RunResult::Validation(history, report))
        }
        Mode::Sweep => Ok(RunResult::Sweep(sensitivity_sweep(manifest)?)),
        Mode::Benchmark => Ok(RunResult::Benchmark(run_benchmark(manifest)?)),
    }
}

/// Writes the output files of a result into `dir`.
pub fn write_outputs(dir: &Path, manifest: &RunManifest, result: &RunResult) -> Result<(), OrchestratorError> {
    match result {
        RunResult::Optimization(h) => output::write_optimization(dir, manifest, h, None),
        RunResult::Validation(h, v) => output::write_optimization(dir, manifest, h, Some(v)),
        RunResult::Sweep(s) => output::write_sweep(dir, manifest, s),
        RunResult::Benchmark(b) => output::write_benchmark(dir, manifest, b),
    }
}

/// Executes the manifest and writes its outputs to `manifest.output`. An
/// aborted optimisation still writes the generations it finished.
pub fn run(manifest: &RunManifest) -> Result<RunResult, OrchestratorError> {
    match execute(manifest) {
        Ok(result) => {
            write_outputs(&manifest.output, manifest, &result)?;
            Ok(result)
        }
        Err(OrchestratorError::Aborted { source, partial }) => {
            output::write_optimization(&manifest.output, manifest, &partial, None)?;
            Err(OrchestratorError::Aborted { source, partial })
        }
        Err(e) => Err(e),
    }
}
