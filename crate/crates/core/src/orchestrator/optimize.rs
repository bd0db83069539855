use rayon::prelude::*;
use serde::Serialize;

use super::manifest::RunManifest;
use super::OrchestratorError;
use crate::cost::{self, BaselineSet, Cost, LinkBaseline};
use crate::ga::{Bounds, Chromosome, GaConfig, GenerationRecord, GeneticAlgorithm};
use crate::model::{denormalize_time, normalize_with, NormalizedParams, Parameter, RepeaterParams, TimeTransform};
use crate::seed::derive_seed;
use crate::sim::{self, ChainParams, ChainTopology, RunStats, SimConfig};
use crate::werner::{self, ReferenceOptimum, WernerBaselines};

/// Genes sit in `[lo, GENE_CEILING]`; a gene of exactly 1 is a perfect
/// parameter, which has no finite cost.
pub const GENE_CEILING: f64 = 1.0 - 1e-9;

/// Which parameters the chromosome carries, and the values of the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneLayout {
    pub searched: Vec<Parameter>,
    /// Physical values used for parameters outside `searched`.
    pub fixed: RepeaterParams,
    pub transform: TimeTransform,
}

impl GeneLayout {
    /// Non-searched parameters take their baseline when one is given and the
    /// perfect value otherwise.
    pub fn from_manifest(m: &RunManifest) -> Self {
        let mut fixed = RepeaterParams::perfect();
        for (&p, &v) in &m.baselines.values {
            if !m.parameters.contains(&p) {
                fixed.set(p, v);
            }
        }
        Self {
            searched: m.parameters.clone(),
            fixed,
            transform: m.time_transform,
        }
    }

    pub fn gene_of(&self, p: Parameter) -> Option<usize> {
        self.searched.iter().position(|&q| q == p)
    }

    /// Physical parameters of a chromosome; not validated.
    pub fn physical(&self, chrom: &[f64]) -> Result<RepeaterParams, OrchestratorError> {
        let mut params = self.fixed;
        for (&p, &g) in self.searched.iter().zip(chrom) {
            let v = if p.is_time() {
                denormalize_time(g, p, self.transform)?
            } else {
                g
            };
            params.set(p, v);
        }
        Ok(params)
    }

    /// The five genes of a chromosome, with fixed parameters normalised.
    pub fn full_genes(&self, chrom: &[f64]) -> Result<NormalizedParams, OrchestratorError> {
        let mut genes = *normalize_with(&self.fixed, self.transform)?.genes();
        for (&p, &g) in self.searched.iter().zip(chrom) {
            genes[p.index()] = g;
        }
        Ok(NormalizedParams::new(genes)?)
    }
}

/// Outcome of evaluating one chromosome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub genes: Option<NormalizedParams>,
    pub params: Option<RepeaterParams>,
    pub stats: Option<RunStats>,
    pub cost: Cost,
}

/// Generations with per-individual simulation results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationHistory {
    pub layout: GeneLayout,
    pub generations: Vec<GenerationRecord>,
    pub evaluations: Vec<Vec<Evaluation>>,
}

impl OptimizationHistory {
    /// `(generation, individual)` of the lowest cost seen; the earliest on ties.
    pub fn best(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (g, record) in self.generations.iter().enumerate() {
            if best.is_none_or(|(_, _, c)| record.best_cost < c) {
                best = Some((g, record.best_index, record.best_cost));
            }
        }
        best.map(|(g, i, _)| (g, i))
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.best().map(|(g, i)| self.generations[g].costs[i])
    }

    pub fn best_chromosome(&self) -> Option<&Chromosome> {
        self.best().map(|(g, i)| &self.generations[g].population[i])
    }
}

/// Everything needed to cost a chromosome.
pub struct Evaluator<'a> {
    pub topology: &'a ChainTopology,
    pub layout: &'a GeneLayout,
    pub baselines: BaselineSet,
    pub link_baselines: Option<&'a [LinkBaseline]>,
    pub reference: Option<BaselineSet>,
    pub sim: SimConfig,
    pub cost: cost::CostConfig,
    pub runs: usize,
}

impl<'a> Evaluator<'a> {
    pub fn from_manifest(m: &'a RunManifest, layout: &'a GeneLayout) -> Result<Self, OrchestratorError> {
        let topology = m
            .topology
            .as_ref()
            .ok_or_else(|| OrchestratorError::Config("a topology is required".into()))?;
        let all = m.baselines.to_set(m.time_transform)?;
        let missing: Vec<&str> = m
            .parameters
            .iter()
            .filter(|p| all.get(**p).is_none())
            .map(|p| p.name())
            .collect();
        if !missing.is_empty() {
            return Err(OrchestratorError::Config(format!(
                "no baseline for searched {}",
                missing.join(", ")
            )));
        }
        Ok(Self {
            topology,
            layout,
            baselines: all.restricted_to(&m.parameters),
            link_baselines: m.link_baselines.as_deref(),
            reference: m.link_baselines.as_ref().map(|_| all.clone()),
            sim: m.simulation,
            cost: m.cost,
            runs: m.runs_per_individual,
        })
    }

    fn chain_params(&self, params: &RepeaterParams) -> Result<ChainParams, OrchestratorError> {
        match (self.link_baselines, &self.reference) {
            (Some(links), Some(reference)) => {
                let per_link = cost::propagate_link_baselines(reference, params, links)?;
                Ok(ChainParams::from_links(&per_link)?)
            }
            _ => Ok(ChainParams::uniform(params, self.topology.links().len())),
        }
    }

    /// Chromosomes outside the model's domain (a zero or one gene, an
    /// infinite time, `T2 > 2 T1`) are given infinite cost without simulating.
    pub fn evaluate(&self, chrom: &[f64], seed: u64) -> Result<Evaluation, OrchestratorError> {
        let infinite = |genes, params| Evaluation {
            genes,
            params,
            stats: None,
            cost: Cost::Infinite,
        };
        let Ok(params) = self.layout.physical(chrom) else {
            return Ok(infinite(None, None));
        };
        let Ok(genes) = self.layout.full_genes(chrom) else {
            return Ok(infinite(None, Some(params)));
        };
        if params.validate().is_err() {
            return Ok(infinite(Some(genes), Some(params)));
        }
        let parameter_cost = match cost::parameter_cost(&self.baselines, &genes, self.cost.aggregate) {
            Ok(Cost::Finite(c)) => Cost::Finite(c),
            _ => return Ok(infinite(Some(genes), Some(params))),
        };
        let chain = match self.chain_params(&params) {
            Ok(c) => c,
            Err(_) => return Ok(infinite(Some(genes), Some(params))),
        };
        let stats = sim::simulate_chain_batch(self.topology, &chain, &self.sim, self.runs, seed)?;
        let cost = cost::penalized_cost(parameter_cost, stats.mean_fidelity, stats.rate, &self.cost)?;
        Ok(Evaluation {
            genes: Some(genes),
            params: Some(params),
            stats: Some(stats),
            cost,
        })
    }
}

/// Default gene box: from the baseline gene up to [`GENE_CEILING`], unless
/// overridden in the manifest.
pub fn search_bounds(m: &RunManifest, layout: &GeneLayout) -> Result<Bounds, OrchestratorError> {
    let baselines = m.baselines.to_set(m.time_transform)?;
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for &p in &layout.searched {
        let (l, h) = match m.bounds.get(&p) {
            Some(&pair) => pair,
            None => (baselines.get(p).unwrap_or(0.0), GENE_CEILING),
        };
        lo.push(l);
        hi.push(h);
    }
    Ok(Bounds::new(lo, hi)?)
}

pub fn ga_config(m: &RunManifest, bounds: Bounds) -> GaConfig {
    GaConfig {
        population_size: m.ga.population_size,
        n_parents: m.ga.n_parents,
        crossover_rate: m.ga.crossover_rate,
        child_mutation_prob: m.ga.child_mutation_prob,
        parent_mutation: m.ga.parent_mutation,
        mutation_width: m.ga.mutation_width,
        n_generations: m.ga.n_generations,
        bounds,
        rng_seed: m.seed,
    }
}

/// Optimises hardware parameters for the manifest's chain.
///
/// Individual `i` of generation `g` is simulated with master seed
/// `derive_seed(derive_seed(seed, g), i)`. If a generation fails, the error
/// carries the generations completed so far.
pub fn run_optimization(m: &RunManifest) -> Result<OptimizationHistory, OrchestratorError> {
    let layout = GeneLayout::from_manifest(m);
    let bounds = search_bounds(m, &layout)?;
    run_optimization_in(m, &layout, bounds)
}

pub fn run_optimization_in(
    m: &RunManifest,
    layout: &GeneLayout,
    bounds: Bounds,
) -> Result<OptimizationHistory, OrchestratorError> {
    let evaluator = Evaluator::from_manifest(m, layout)?;
    let ga = GeneticAlgorithm::new(ga_config(m, bounds))?;
    let mut evaluations: Vec<Vec<Evaluation>> = Vec::new();
    let mut seen: Vec<GenerationRecord> = Vec::new();
    let generations = ga.run(|g, population: &[Chromosome]| {
        let gen_seed = derive_seed(m.seed, g as u64);
        let evals = population
            .par_iter()
            .enumerate()
            .map(|(i, chrom)| evaluator.evaluate(chrom, derive_seed(gen_seed, i as u64)))
            .collect::<Result<Vec<_>, _>>()?;
        let costs: Vec<f64> = evals.iter().map(|e| e.cost.value()).collect();
        seen.push(GenerationRecord::new(g, population.to_vec(), costs.clone()));
        evaluations.push(evals);
        Ok::<_, OrchestratorError>(costs)
    });
    match generations {
        Ok(generations) => Ok(OptimizationHistory {
            layout: layout.clone(),
            generations,
            evaluations,
        }),
        Err(e) => Err(OrchestratorError::Aborted {
            source: Box::new(e),
            partial: Box::new(OptimizationHistory {
                layout: layout.clone(),
                generations: seen,
                evaluations,
            }),
        }),
    }
}

/// Validation run: the optimizer on a one-repeater Werner chain next to the
/// closed-form optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub reference: ReferenceOptimum,
    pub best_cost: Option<f64>,
    /// `best_cost / reference.cost - 1`.
    pub relative_gap: Option<f64>,
}

pub fn reference_for(m: &RunManifest) -> Result<ReferenceOptimum, OrchestratorError> {
    let topology = m
        .topology
        .as_ref()
        .ok_or_else(|| OrchestratorError::Config("validate mode needs a topology".into()))?;
    if topology.n_repeaters() != 1 {
        return Err(OrchestratorError::Config(
            "validate mode needs a chain with one repeater".into(),
        ));
    }
    let mut searched = m.parameters.clone();
    searched.sort();
    if searched != [Parameter::FEl, Parameter::PSuc, Parameter::Sq] {
        return Err(OrchestratorError::Config(
            "validate mode searches exactly f_el, p_suc, s_q".into(),
        ));
    }
    let get = |p: Parameter| {
        m.baselines
            .values
            .get(&p)
            .copied()
            .ok_or_else(|| OrchestratorError::Config(format!("validate mode needs a {p} baseline")))
    };
    let base = WernerBaselines {
        f_el: get(Parameter::FEl)?,
        s_q: get(Parameter::Sq)?,
        p_suc: get(Parameter::PSuc)?,
    };
    let t_cycle = topology.links()[0].t_cycle;
    if topology.links().iter().any(|l| l.t_cycle != t_cycle) {
        return Err(OrchestratorError::Config(
            "validate mode needs equal cycle times".into(),
        ));
    }
    Ok(werner::reference_global_optimum(
        &m.cost,
        base,
        t_cycle,
        topology.t_swap(),
    )?)
}

pub fn validation_report(reference: ReferenceOptimum, history: &OptimizationHistory) -> ValidationReport {
    let best_cost = history.best_cost();
    ValidationReport {
        relative_gap: best_cost.map(|c| c / reference.cost - 1.0),
        best_cost,
        reference,
    }
}

/// Narrows the search box for a longer chain using a finished run on a
/// shorter one over the same span.
///
/// More repeaters need at least the previous success probability to keep
/// the rate, so the `p_suc` gene is floored at the previous best. No other
/// gene is touched.
pub fn propagate_bounds(
    previous: &OptimizationHistory,
    previous_topology: &ChainTopology,
    new_topology: &ChainTopology,
    bounds: &Bounds,
    layout: &GeneLayout,
) -> Result<Bounds, OrchestratorError> {
    let (a, b) = (previous_topology.total_length_km(), new_topology.total_length_km());
    if (a - b).abs() > 1e-6 * a.abs().max(b.abs()) {
        return Err(OrchestratorError::Incompatible(format!(
            "spans differ: {a} km vs {b} km"
        )));
    }
    if new_topology.n_repeaters() < previous_topology.n_repeaters() {
        return Err(OrchestratorError::Incompatible(format!(
            "{} repeaters cannot inherit from {}",
            new_topology.n_repeaters(),
            previous_topology.n_repeaters()
        )));
    }
    let best = previous
        .best_chromosome()
        .ok_or_else(|| OrchestratorError::Incompatible("previous run has no generations".into()))?;
    let p_suc = previous.layout.physical(best)?.p_suc;
    let gene = layout
        .gene_of(Parameter::PSuc)
        .ok_or_else(|| OrchestratorError::Incompatible("p_suc is not searched".into()))?;
    let mut out = bounds.clone();
    out.raise_lower(gene, p_suc);
    Ok(out)
}
