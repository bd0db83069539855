use serde::Serialize;

use super::manifest::{BenchmarkFunction, RunManifest};
use super::OrchestratorError;
use crate::benchmark::{quartic, rastrigin, QUARTIC_BOUND, RASTRIGIN_BOUND};
use crate::ga::{self, Bounds, GaConfig, GenerationRecord};
use crate::seed::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRun {
    pub function: BenchmarkFunction,
    pub generations: Vec<GenerationRecord>,
    /// Best member of the final generation, re-evaluated without noise.
    pub final_clean_cost: f64,
}

pub fn bound_of(function: BenchmarkFunction) -> f64 {
    match function {
        BenchmarkFunction::Quartic => QUARTIC_BOUND,
        BenchmarkFunction::Rastrigin => RASTRIGIN_BOUND,
    }
}

fn clean(function: BenchmarkFunction, x: &[f64]) -> Result<f64, OrchestratorError> {
    Ok(match function {
        BenchmarkFunction::Quartic => quartic::<SimRng>(x, None)?,
        BenchmarkFunction::Rastrigin => rastrigin(x)?,
    })
}

/// Minimises a test function. Noise for member `i` of generation `g` uses
/// the seed `derive_seed(derive_seed(seed, g), i)`.
pub fn run_benchmark(m: &RunManifest) -> Result<BenchmarkRun, OrchestratorError> {
    let s = m.benchmark;
    let bound = bound_of(s.function);
    let mut config = GaConfig::new(Bounds::uniform(s.dimension, -bound, bound)?);
    config.population_size = m.ga.population_size;
    config.n_parents = m.ga.n_parents;
    config.crossover_rate = m.ga.crossover_rate;
    config.child_mutation_prob = m.ga.child_mutation_prob;
    config.parent_mutation = m.ga.parent_mutation;
    config.mutation_width = m.ga.mutation_width;
    config.n_generations = m.ga.n_generations;
    config.rng_seed = m.seed;
    let noisy = s.noise && s.function == BenchmarkFunction::Quartic;
    let mut failure = None;
    let generations = ga::minimize(config, |g, i, x| {
        let value = if noisy {
            let mut rng = rng_from_seed(derive_seed(derive_seed(m.seed, g as u64), i as u64));
            quartic(x, Some(&mut rng)).map_err(OrchestratorError::from)
        } else {
            clean(s.function, x)
        };
        value.unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::INFINITY
        })
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let last = generations
        .last()
        .ok_or_else(|| OrchestratorError::Config("no generations".into()))?;
    let final_clean_cost = clean(s.function, last.best())?;
    Ok(BenchmarkRun {
        function: s.function,
        generations,
        final_clean_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn small_rastrigin_run_improves() {
        let m = RunManifest::from_ini_str(
            "[run]\nmode = benchmark\nseed = 2\n[benchmark]\nfunction = rastrigin\ndimension = 5\n[ga]\nn_generations = 30\n",
            Path::new("."),
        )
        .unwrap();
        let r = run_benchmark(&m).unwrap();
        assert_eq!(r.generations.len(), 30);
        assert!(r.generations[29].best_cost <= r.generations[0].best_cost);
        assert_eq!(r.final_clean_cost, r.generations[29].best_cost);
    }
}
