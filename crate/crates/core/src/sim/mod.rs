//! Discrete-event simulation of a SWAP-ASAP repeater chain.
//!
//! Every run starts with empty memories and ends when the two end nodes share
//! an entangled pair. Each node holds one memory per side, generates
//! entanglement with one neighbour at a time and swaps as soon as it holds a
//! qubit on both sides. There are no cut-offs.

mod engine;
mod stats;
mod topology;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, RepeaterParams};
use crate::quantum::{QuantumError, TwoQubitState};
use crate::seed;

pub use stats::RunStats;
pub use topology::{ChainTopology, LinkSpec, DEFAULT_C_FIBER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("success probability must be in (0, 1], got {0}")]
    SuccessProbability(f64),
    #[error("a batch needs at least one run")]
    EmptyBatch,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Density-matrix links with depolarizing swaps and T1/T2 memories.
    #[default]
    Full,
    /// Werner links, no memory decoherence, swap noise matched to the closed
    /// form end-to-end fidelity `1/4 + s^N (1/2 + s^N/4) x^(N+1)`.
    Werner,
}

/// When stored qubits pick up T2 dephasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingScope {
    /// Only while the holding node is attempting entanglement generation.
    #[default]
    AttemptWindows,
    Continuous,
}

/// Which link a node works on next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Repeaters finish their left link before starting their right one.
    #[default]
    Sequential,
    /// Any link whose two nodes are idle starts immediately, scanning from
    /// the left, so repeaters still prefer their left link.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimConfig {
    pub noise_mode: NoiseMode,
    pub dephasing_scope: DephasingScope,
    pub schedule: Schedule,
}

impl SimConfig {
    pub fn werner() -> Self {
        Self {
            noise_mode: NoiseMode::Werner,
            ..Self::default()
        }
    }
}

/// Per-link elementary-link hardware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkHardware {
    pub f_el: f64,
    pub p_suc: f64,
}

/// Hardware for a whole chain: per-link generation figures plus the node
/// properties shared by every repeater.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainParams {
    pub links: Vec<LinkHardware>,
    pub s_q: f64,
    pub t1: f64,
    pub t2: f64,
}

impl ChainParams {
    pub fn uniform(params: &RepeaterParams, n_links: usize) -> Self {
        Self {
            links: vec![
                LinkHardware {
                    f_el: params.f_el,
                    p_suc: params.p_suc
                };
                n_links
            ],
            s_q: params.s_q,
            t1: params.t1,
            t2: params.t2,
        }
    }

    /// Builds from one parameter set per link; node parameters must agree.
    pub fn from_links(per_link: &[RepeaterParams]) -> Result<Self, SimError> {
        let first = per_link
            .first()
            .ok_or_else(|| SimError::Params("no link parameters".into()))?;
        if per_link
            .iter()
            .any(|p| p.s_q != first.s_q || p.t1 != first.t1 || p.t2 != first.t2)
        {
            return Err(SimError::Params("s_q, t1 and t2 must be equal on every link".into()));
        }
        Ok(Self {
            links: per_link
                .iter()
                .map(|p| LinkHardware {
                    f_el: p.f_el,
                    p_suc: p.p_suc,
                })
                .collect(),
            s_q: first.s_q,
            t1: first.t1,
            t2: first.t2,
        })
    }

    pub fn validate(&self, topology: &ChainTopology) -> Result<(), SimError> {
        if self.links.len() != topology.links().len() {
            return Err(SimError::Params(format!(
                "{} link parameter sets for {} links",
                self.links.len(),
                topology.links().len()
            )));
        }
        for link in &self.links {
            RepeaterParams::new(link.f_el, link.p_suc, self.s_q, self.t1, self.t2)?;
        }
        Ok(())
    }
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub end_to_end_state: TwoQubitState,
    /// Seconds from the start of the run until the end-to-end pair exists.
    pub completion_time: f64,
    /// Fidelity with `psi+`.
    pub fidelity: f64,
}

/// Attempts needed for one elementary link: geometric on `{1, 2, ...}` with
/// mean `1 / p_suc`.
///
/// Sampled by inversion from a single uniform draw, so for a fixed random
/// stream the count never increases when `p_suc` grows.
pub fn sample_attempt_count<R: Rng + ?Sized>(p_suc: f64, rng: &mut R) -> Result<u64, SimError> {
    if !(p_suc > 0.0 && p_suc <= 1.0) {
        return Err(SimError::SuccessProbability(p_suc));
    }
    // (0, 1]
    let u = 1.0 - rng.random::<f64>();
    if p_suc == 1.0 {
        return Ok(1);
    }
    let k = (u.ln() / (-p_suc).ln_1p()).ceil();
    Ok(if k < 1.0 { 1 } else { k as u64 })
}

/// One run with the same hardware on every link.
pub fn simulate_run(
    topology: &ChainTopology,
    params: &RepeaterParams,
    config: &SimConfig,
    seed: u64,
) -> Result<RunOutcome, SimError> {
    simulate_chain_run(
        topology,
        &ChainParams::uniform(params, topology.links().len()),
        config,
        seed,
    )
}

pub fn simulate_chain_run(
    topology: &ChainTopology,
    params: &ChainParams,
    config: &SimConfig,
    seed: u64,
) -> Result<RunOutcome, SimError> {
    params.validate(topology)?;
    let mut rng = seed::rng_from_seed(seed);
    engine::run(topology, params, config, &mut rng)
}

pub fn simulate_batch(
    topology: &ChainTopology,
    params: &RepeaterParams,
    config: &SimConfig,
    n_runs: usize,
    master_seed: u64,
) -> Result<RunStats, SimError> {
    simulate_chain_batch(
        topology,
        &ChainParams::uniform(params, topology.links().len()),
        config,
        n_runs,
        master_seed,
    )
}

/// `n_runs` independent runs; run `i` is seeded with
/// `derive_seed(master_seed, i)`. Runs execute on the current rayon pool and
/// are reduced in index order, so the result does not depend on the number
/// of worker threads.
pub fn simulate_chain_batch(
    topology: &ChainTopology,
    params: &ChainParams,
    config: &SimConfig,
    n_runs: usize,
    master_seed: u64,
) -> Result<RunStats, SimError> {
    if n_runs == 0 {
        return Err(SimError::EmptyBatch);
    }
    params.validate(topology)?;
    let samples = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_from_seed(seed::derive_seed(master_seed, i));
            engine::run(topology, params, config, &mut rng).map(|o| (o.fidelity, o.completion_time))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunStats::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::BellState;
    use crate::werner;

    fn perfect_with(f_el: f64, s_q: f64) -> RepeaterParams {
        RepeaterParams {
            f_el,
            s_q,
            ..RepeaterParams::perfect()
        }
    }

    #[test]
    fn attempt_count_edge_cases() {
        let mut rng = seed::rng_from_seed(1);
        for _ in 0..100 {
            assert_eq!(sample_attempt_count(1.0, &mut rng).unwrap(), 1);
        }
        assert!(matches!(
            sample_attempt_count(0.0, &mut rng),
            Err(SimError::SuccessProbability(_))
        ));
        assert!(sample_attempt_count(1e-10, &mut rng).unwrap() >= 1);
    }

    #[test]
    fn attempt_count_means() {
        for (p, n) in [(0.5, 100_000usize), (0.0046, 100_000)] {
            let mut rng = seed::rng_from_seed(99);
            let xs: Vec<f64> = (0..n)
                .map(|_| sample_attempt_count(p, &mut rng).unwrap() as f64)
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let stderr = (var / n as f64).sqrt();
            assert!((mean - 1.0 / p).abs() <= 3.0 * stderr, "p={p}: {mean} vs {}", 1.0 / p);
        }
    }

    #[test]
    fn deterministic_three_node_schedule() {
        let topo = ChainTopology::uniform(3, 1.0, 1.0, 1.0)
            .unwrap()
            .with_t_cycle(0.25)
            .unwrap()
            .with_t_swap(0.5)
            .unwrap();
        let out = simulate_run(&topo, &RepeaterParams::perfect(), &SimConfig::default(), 3).unwrap();
        assert!((out.fidelity - 1.0).abs() < 1e-12);
        assert_eq!(out.completion_time, 2.0 * 0.25 + 0.5);
    }

    #[test]
    fn two_node_chain_delivers_elementary_link() {
        let topo = ChainTopology::uniform(2, 10.0, 0.9, 0.5).unwrap();
        let out = simulate_run(&topo, &perfect_with(0.9, 1.0), &SimConfig::default(), 5).unwrap();
        assert!((out.fidelity - 0.9).abs() < 1e-15);
        assert!(out.completion_time > 0.0);
    }

    #[test]
    fn werner_three_node_matches_swap_formula() {
        let topo = ChainTopology::uniform(3, 10.0, 0.9, 0.5).unwrap();
        for (f, s) in [(0.9, 0.95), (0.8, 1.0), (0.99, 0.9)] {
            let out = simulate_run(&topo, &perfect_with(f, s), &SimConfig::werner(), 11).unwrap();
            let expected = werner::werner_swap_fidelity(f, s).unwrap();
            assert!((out.fidelity - expected).abs() < 1e-12, "{f},{s}");
        }
    }

    #[test]
    fn full_mode_perfect_long_chain() {
        let topo = ChainTopology::uniform(7, 50.0, 1.0, 0.3).unwrap();
        let mut cfg = SimConfig::default();
        for schedule in [Schedule::Sequential, Schedule::Greedy] {
            cfg.schedule = schedule;
            let out = simulate_run(&topo, &RepeaterParams::perfect(), &cfg, 8).unwrap();
            assert!((out.fidelity - 1.0).abs() < 1e-12);
            assert!((out.end_to_end_state.fidelity(BellState::PsiPlus) - out.fidelity).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_is_never_slower_on_same_stream() {
        // with per-link attempt counts drawn in start order the streams differ,
        // so compare means over a batch instead of single runs
        let topo = ChainTopology::uniform(6, 20.0, 1.0, 0.2).unwrap();
        let seq = simulate_batch(&topo, &RepeaterParams::perfect(), &SimConfig::default(), 2000, 4).unwrap();
        let cfg = SimConfig {
            schedule: Schedule::Greedy,
            ..SimConfig::default()
        };
        let greedy = simulate_batch(&topo, &RepeaterParams::perfect(), &cfg, 2000, 4).unwrap();
        assert!(greedy.mean_time < seq.mean_time);
    }

    #[test]
    fn batch_rejects_zero_runs() {
        let topo = ChainTopology::uniform(3, 10.0, 0.9, 0.5).unwrap();
        assert_eq!(
            simulate_batch(&topo, &RepeaterParams::perfect(), &SimConfig::default(), 0, 1),
            Err(SimError::EmptyBatch)
        );
    }

    #[test]
    fn single_run_batch_equals_outcome() {
        let topo = ChainTopology::uniform(4, 10.0, 0.9, 0.5).unwrap();
        let params = RepeaterParams::new(0.95, 0.3, 0.97, 100.0, 0.01).unwrap();
        let stats = simulate_batch(&topo, &params, &SimConfig::default(), 1, 77).unwrap();
        let run = simulate_run(&topo, &params, &SimConfig::default(), seed::derive_seed(77, 0)).unwrap();
        assert_eq!(stats.mean_fidelity, run.fidelity);
        assert_eq!(stats.mean_time, run.completion_time);
        assert_eq!(stats.fidelity_stderr, 0.0);
        assert_eq!(stats.rate_stderr, 0.0);
    }

    #[test]
    fn rejects_invalid_params() {
        let topo = ChainTopology::uniform(3, 10.0, 0.9, 0.5).unwrap();
        let bad = RepeaterParams {
            t2: 10.0,
            t1: 1.0,
            ..RepeaterParams::perfect()
        };
        assert!(simulate_run(&topo, &bad, &SimConfig::default(), 0).is_err());
        let wrong_len = ChainParams::uniform(&RepeaterParams::perfect(), 5);
        assert!(simulate_chain_run(&topo, &wrong_len, &SimConfig::default(), 0).is_err());
    }
}
