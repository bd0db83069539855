use serde::Serialize;

use super::manifest::{Metric, RunManifest};
use super::optimize::GENE_CEILING;
use super::OrchestratorError;
use crate::model::{denormalize_time, Parameter, RepeaterParams, TimeTransform};
use crate::sim::{self, ChainTopology, RunStats, SimConfig};

const COARSE_POINTS: usize = 8;

/// One simulated point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepProbe {
    pub gene: f64,
    pub value: f64,
    pub response: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: Parameter,
    pub metric: Metric,
    pub threshold: f64,
    /// Smallest probed gene meeting the threshold.
    pub crossing: f64,
    /// Final bracket `[infeasible, feasible]`.
    pub interval: (f64, f64),
    pub probes: Vec<SweepProbe>,
}

/// Sweeps one parameter with every other one perfect.
pub struct Sweep<'a> {
    pub topology: &'a ChainTopology,
    pub parameter: Parameter,
    pub metric: Metric,
    pub threshold: f64,
    pub sim: SimConfig,
    pub transform: TimeTransform,
    pub runs: usize,
    pub seed: u64,
}

impl<'a> Sweep<'a> {
    pub fn from_manifest(m: &'a RunManifest) -> Result<Self, OrchestratorError> {
        Ok(Self {
            topology: m
                .topology
                .as_ref()
                .ok_or_else(|| OrchestratorError::Config("sweep mode needs a topology".into()))?,
            parameter: m.sweep.parameter,
            metric: m.sweep.metric,
            threshold: m.sweep.threshold,
            sim: m.simulation,
            transform: m.time_transform,
            runs: m.runs_per_individual,
            seed: m.seed,
        })
    }

    /// Every probe reuses the same seed, so neighbouring probes share their
    /// random draws.
    pub fn probe(&self, gene: f64) -> Result<SweepProbe, OrchestratorError> {
        let value = if self.parameter.is_time() {
            denormalize_time(gene, self.parameter, self.transform)?
        } else {
            gene
        };
        let mut params = RepeaterParams::perfect();
        params.set(self.parameter, value);
        let (response, stderr) = if params.validate().is_err() {
            (0.0, 0.0)
        } else {
            let stats: RunStats = sim::simulate_batch(self.topology, &params, &self.sim, self.runs, self.seed)?;
            match self.metric {
                Metric::Fidelity => (stats.mean_fidelity, stats.fidelity_stderr),
                Metric::Rate => (stats.rate, stats.rate_stderr),
            }
        };
        Ok(SweepProbe {
            gene,
            value,
            response,
            stderr,
        })
    }

    fn feasible(&self, p: &SweepProbe) -> bool {
        p.response >= self.threshold - 1e-12
    }

    /// Bisects `[lower, GENE_CEILING]` for the smallest gene meeting the
    /// threshold. The response must be non-decreasing at a coarse grid, up
    /// to three standard errors.
    pub fn run(&self, lower: f64, iterations: u32) -> Result<SweepResult, OrchestratorError> {
        let mut probes = Vec::new();
        let mut previous: Option<SweepProbe> = None;
        for i in 0..COARSE_POINTS {
            let gene = lower + (GENE_CEILING - lower) * i as f64 / (COARSE_POINTS - 1) as f64;
            let p = self.probe(gene)?;
            if let Some(q) = &previous {
                let slack = 3.0 * (p.stderr.powi(2) + q.stderr.powi(2)).sqrt() + 1e-12;
                if p.response < q.response - slack {
                    return Err(OrchestratorError::NonMonotone {
                        parameter: self.parameter,
                        at: gene,
                    });
                }
            }
            previous = Some(p.clone());
            probes.push(p);
        }
        let (lo_probe, hi_probe) = (&probes[0], &probes[COARSE_POINTS - 1]);
        if !self.feasible(hi_probe) {
            return Err(OrchestratorError::Unreachable {
                parameter: self.parameter,
                best: hi_probe.response,
                threshold: self.threshold,
            });
        }
        let (mut a, mut b) = if self.feasible(lo_probe) {
            (lower, lower)
        } else {
            let k = probes
                .iter()
                .position(|p| self.feasible(p))
                .unwrap_or(COARSE_POINTS - 1);
            (probes[k - 1].gene, probes[k].gene)
        };
        if a < b {
            for _ in 0..iterations {
                let mid = 0.5 * (a + b);
                let p = self.probe(mid)?;
                if self.feasible(&p) {
                    b = mid;
                } else {
                    a = mid;
                }
                probes.push(p);
            }
        }
        Ok(SweepResult {
            parameter: self.parameter,
            metric: self.metric,
            threshold: self.threshold,
            crossing: b,
            interval: (a, b),
            probes,
        })
    }
}

pub fn sensitivity_sweep(m: &RunManifest) -> Result<SweepResult, OrchestratorError> {
    Sweep::from_manifest(m)?.run(m.sweep.lower, m.sweep.iterations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(topology: &ChainTopology, parameter: Parameter, threshold: f64) -> Sweep<'_> {
        Sweep {
            topology,
            parameter,
            metric: Metric::Fidelity,
            threshold,
            sim: SimConfig::werner(),
            transform: TimeTransform::Saturating,
            runs: 10,
            seed: 5,
        }
    }

    #[test]
    fn fidelity_crossing_of_f_el() {
        let topo = ChainTopology::uniform(2, 10.0, 0.5, 0.1).unwrap();
        let r = sweep(&topo, Parameter::FEl, 0.8).run(0.0, 20).unwrap();
        assert!((r.crossing - 0.8).abs() < 1e-5, "{}", r.crossing);
        assert!(r.interval.0 <= r.interval.1);
    }

    #[test]
    fn unreachable_threshold_is_reported() {
        let topo = ChainTopology::uniform(2, 10.0, 0.5, 0.1).unwrap();
        let err = sweep(&topo, Parameter::FEl, 1.5).run(0.0, 4).unwrap_err();
        assert!(matches!(err, OrchestratorError::Unreachable { .. }));
    }

    #[test]
    fn quarter_fidelity_is_always_met() {
        let topo = ChainTopology::uniform(5, 10.0, 0.5, 0.1).unwrap();
        let r = sweep(&topo, Parameter::Sq, 0.25).run(0.0, 12).unwrap();
        assert_eq!(r.crossing, 0.0);
    }

    #[test]
    fn already_feasible_lower_end() {
        let topo = ChainTopology::uniform(2, 10.0, 0.5, 0.1).unwrap();
        let r = sweep(&topo, Parameter::Sq, 0.9).run(0.5, 4).unwrap();
        assert_eq!(r.crossing, 0.5);
    }
}
