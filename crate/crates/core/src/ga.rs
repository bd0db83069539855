//! Real-coded genetic algorithm: roulette-wheel selection on inverted cost,
//! single-point crossover, adaptive mutation and elitism at a fixed
//! population size.
//!
//! The engine never evaluates costs itself. [`GeneticAlgorithm::run`] hands
//! each generation to a caller-supplied evaluator, which is free to spread
//! the work over threads.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::seed;

pub type Chromosome = Vec<f64>;

/// Added to costs before inversion.
pub const FITNESS_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("gene {gene}: bounds [{lo}, {hi}] are empty or not finite")]
    BadBounds { gene: usize, lo: f64, hi: f64 },
    #[error("chromosomes need at least one gene")]
    NoGenes,
    #[error("{name} = {value} outside [0, 1]")]
    Rate { name: &'static str, value: f64 },
    #[error("population of {population} cannot supply {parents} parents")]
    TooFewMembers { population: usize, parents: usize },
    #[error("population size must be positive")]
    EmptyPopulation,
    #[error("every individual has infinite cost")]
    AllInfinite,
    #[error("cost is NaN for individual {0}")]
    NanCost(usize),
    #[error("expected {expected} costs, got {got}")]
    CostCount { expected: usize, got: usize },
    #[error("crossover point {point} outside [1, {max}]")]
    CrossoverPoint { point: usize, max: usize },
    #[error("parents have different lengths")]
    LengthMismatch,
}

/// Per-gene search box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GaError> {
        if lo.is_empty() {
            return Err(GaError::NoGenes);
        }
        if lo.len() != hi.len() {
            return Err(GaError::LengthMismatch);
        }
        for (gene, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(GaError::BadBounds { gene, lo: l, hi: h });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self, GaError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| l <= v && v <= h)
    }

    /// Replaces the lower bound of one gene, clamped to its upper bound.
    pub fn raise_lower(&mut self, gene: usize, lo: f64) {
        self.lo[gene] = self.lo[gene].max(lo).min(self.hi[gene]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ParentCount {
    Fixed(usize),
    /// Share of the population, rounded, at least one.
    Fraction(f64),
}

impl ParentCount {
    pub fn resolve(self, population: usize) -> usize {
        match self {
            ParentCount::Fixed(n) => n,
            ParentCount::Fraction(f) => ((f * population as f64).round() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ParentMutation {
    /// Cost-dependent probability from [`adaptive_mutation_prob`].
    Adaptive,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub n_parents: ParentCount,
    pub crossover_rate: f64,
    pub child_mutation_prob: f64,
    pub parent_mutation: ParentMutation,
    /// Half-width of the mutation step as a share of each gene's box width.
    pub mutation_width: f64,
    pub n_generations: usize,
    pub bounds: Bounds,
    pub rng_seed: u64,
}

impl GaConfig {
    pub fn new(bounds: Bounds) -> Self {
        Self {
            population_size: 150,
            n_parents: ParentCount::Fixed(10),
            crossover_rate: 0.7,
            child_mutation_prob: 0.02,
            parent_mutation: ParentMutation::Adaptive,
            mutation_width: 0.1,
            n_generations: 200,
            bounds,
            rng_seed: 0,
        }
    }

    pub fn parents(&self) -> usize {
        self.n_parents.resolve(self.population_size)
    }

    pub fn n_children(&self) -> usize {
        (self.crossover_rate * self.population_size as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size == 0 {
            return Err(GaError::EmptyPopulation);
        }
        let parents = self.parents();
        if parents == 0 || parents > self.population_size {
            return Err(GaError::TooFewMembers {
                population: self.population_size,
                parents,
            });
        }
        let mut rates = vec![
            ("crossover_rate", self.crossover_rate),
            ("child_mutation_prob", self.child_mutation_prob),
            ("mutation_width", self.mutation_width),
        ];
        if let ParentMutation::Fixed(p) = self.parent_mutation {
            rates.push(("parent mutation probability", p));
        }
        if let ParentCount::Fraction(f) = self.n_parents {
            rates.push(("parent fraction", f));
        }
        for (name, value) in rates {
            if !(0.0..=1.0).contains(&value) {
                return Err(GaError::Rate { name, value });
            }
        }
        Bounds::new(self.bounds.lo.clone(), self.bounds.hi.clone())?;
        Ok(())
    }
}

/// Population after evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub index: usize,
    pub population: Vec<Chromosome>,
    /// `f64::INFINITY` marks an individual that could not be costed.
    pub costs: Vec<f64>,
    pub best_index: usize,
    pub best_cost: f64,
    /// Mean over the finite costs; infinite when none is finite.
    pub mean_cost: f64,
}

impl GenerationRecord {
    /// Record of an evaluated population; costs must not be NaN.
    pub fn new(index: usize, population: Vec<Chromosome>, costs: Vec<f64>) -> Self {
        let (mean_cost, _) = finite_stats(&costs);
        let best_index = best_index(&costs);
        Self {
            index,
            best_index,
            best_cost: costs.get(best_index).copied().unwrap_or(f64::INFINITY),
            mean_cost,
            population,
            costs,
        }
    }

    pub fn best(&self) -> &Chromosome {
        &self.population[self.best_index]
    }
}

pub fn init_population<R: Rng + ?Sized>(config: &GaConfig, rng: &mut R) -> Result<Vec<Chromosome>, GaError> {
    config.validate()?;
    let b = &config.bounds;
    Ok((0..config.population_size)
        .map(|_| {
            (0..b.dim())
                .map(|g| {
                    if b.lo[g] == b.hi[g] {
                        b.lo[g]
                    } else {
                        rng.random_range(b.lo[g]..=b.hi[g])
                    }
                })
                .collect()
        })
        .collect())
}

/// Selection probabilities `f_i / sum f_j` with `f_i = 1 / (c_i + eps)`.
///
/// Infinite costs get probability zero. When some cost is zero or negative
/// all finite costs are first shifted by `1 - min`.
pub fn roulette_probabilities(costs: &[f64]) -> Result<Vec<f64>, GaError> {
    if let Some(i) = costs.iter().position(|c| c.is_nan()) {
        return Err(GaError::NanCost(i));
    }
    let min = costs
        .iter()
        .copied()
        .filter(|c| c.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(GaError::AllInfinite);
    }
    let shift = if min <= 0.0 { 1.0 - min } else { 0.0 };
    let fitness: Vec<f64> = costs
        .iter()
        .map(|&c| {
            if c.is_finite() {
                1.0 / (c + shift + FITNESS_EPS)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = fitness.iter().sum();
    Ok(fitness.into_iter().map(|f| f / total).collect())
}

/// First `point` genes of `a` followed by the rest of `b`.
pub fn crossover(a: &[f64], b: &[f64], point: usize) -> Result<Chromosome, GaError> {
    if a.len() != b.len() {
        return Err(GaError::LengthMismatch);
    }
    if point == 0 || point >= a.len() {
        return Err(GaError::CrossoverPoint {
            point,
            max: a.len().saturating_sub(1),
        });
    }
    Ok(a[..point].iter().chain(&b[point..]).copied().collect())
}

/// 0.5 above the mean cost, otherwise scaled linearly from 0 at the best
/// cost up to 0.5 at the mean. A population of equal costs gets 0.5.
pub fn adaptive_mutation_prob(c_k: f64, c_mean: f64, c_min: f64) -> f64 {
    if c_k > c_mean || c_mean <= c_min {
        return 0.5;
    }
    (0.5 * (c_k - c_min) / (c_mean - c_min)).clamp(0.0, 0.5)
}

/// With probability `p_m`, moves every gene by a uniform step of at most
/// `width` times its box width and clips to the box.
pub fn mutate<R: Rng + ?Sized>(chrom: &[f64], p_m: f64, bounds: &Bounds, width: f64, rng: &mut R) -> Chromosome {
    let mut out = chrom.to_vec();
    if p_m <= 0.0 || !rng.random_bool(p_m.min(1.0)) {
        return out;
    }
    for (g, v) in out.iter_mut().enumerate() {
        let span = width * (bounds.hi[g] - bounds.lo[g]);
        if span > 0.0 {
            *v = (*v + rng.random_range(-span..=span)).clamp(bounds.lo[g], bounds.hi[g]);
        }
    }
    out
}

/// Draws `k` distinct indices, each draw proportional to `weights` among the
/// indices not yet taken. Zero-weight indices are only taken once every
/// positive weight is exhausted, uniformly at random.
fn sample_without_replacement<R: Rng + ?Sized>(weights: &[f64], k: usize, rng: &mut R) -> Vec<usize> {
    let mut w = weights.to_vec();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = w.iter().sum();
        let choice = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &wi) in w.iter().enumerate() {
                if wi > 0.0 {
                    chosen = Some(i);
                    if r < wi {
                        break;
                    }
                    r -= wi;
                }
            }
            chosen.expect("positive total weight")
        } else {
            let rest: Vec<usize> = (0..w.len()).filter(|i| !picked.contains(i)).collect();
            rest[rng.random_range(0..rest.len())]
        };
        w[choice] = 0.0;
        picked.push(choice);
    }
    picked
}

fn finite_stats(costs: &[f64]) -> (f64, f64) {
    let finite: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
    if finite.is_empty() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    (mean, min)
}

fn best_index(costs: &[f64]) -> usize {
    (0..costs.len())
        .min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
        .unwrap_or(0)
}

/// Breeds the next population from an evaluated one.
///
/// Roulette selection picks the parents without replacement. Children come
/// from pairs of distinct parents, crossed at a uniform point. Parents are
/// mutated with [`ParentMutation`], children with `child_mutation_prob`.
/// The previous best is added unchanged if no member equals it. Surplus
/// members are removed at random, sparing the elite; a shortfall is filled
/// with previous members in ascending cost order.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[Chromosome],
    costs: &[f64],
    config: &GaConfig,
    rng: &mut R,
) -> Result<Vec<Chromosome>, GaError> {
    if costs.len() != population.len() {
        return Err(GaError::CostCount {
            expected: population.len(),
            got: costs.len(),
        });
    }
    let n_parents = config.parents();
    if population.len() < n_parents || population.is_empty() {
        return Err(GaError::TooFewMembers {
            population: population.len(),
            parents: n_parents,
        });
    }
    let probs = roulette_probabilities(costs)?;
    let parents = sample_without_replacement(&probs, n_parents, rng);
    let (c_mean, c_min) = finite_stats(costs);
    let dim = config.bounds.dim();

    let mut next = Vec::with_capacity(config.population_size + 1);
    for &i in &parents {
        let p_m = match config.parent_mutation {
            ParentMutation::Adaptive => adaptive_mutation_prob(costs[i], c_mean, c_min),
            ParentMutation::Fixed(p) => p,
        };
        next.push(mutate(&population[i], p_m, &config.bounds, config.mutation_width, rng));
    }
    for _ in 0..config.n_children() {
        let (a, b) = if parents.len() >= 2 {
            let pair = index::sample(rng, parents.len(), 2);
            (parents[pair.index(0)], parents[pair.index(1)])
        } else {
            (parents[0], parents[0])
        };
        let child = if dim >= 2 {
            crossover(&population[a], &population[b], rng.random_range(1..dim))?
        } else {
            population[a].clone()
        };
        next.push(mutate(
            &child,
            config.child_mutation_prob,
            &config.bounds,
            config.mutation_width,
            rng,
        ));
    }

    let elite_src = best_index(costs);
    let elite = &population[elite_src];
    let elite_pos = match next.iter().position(|c| c == elite) {
        Some(pos) => pos,
        None => {
            next.push(elite.clone());
            next.len() - 1
        }
    };

    let target = config.population_size;
    if next.len() > target {
        let mut removable: Vec<usize> = (0..next.len()).filter(|&i| i != elite_pos).collect();
        let surplus = next.len() - target;
        let mut drop = vec![false; next.len()];
        for _ in 0..surplus {
            let k = rng.random_range(0..removable.len());
            drop[removable.swap_remove(k)] = true;
        }
        next = next.into_iter().zip(drop).filter(|(_, d)| !d).map(|(c, _)| c).collect();
    } else if next.len() < target {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        // members not yet present first, then repeats
        for &i in &order {
            if next.len() == target {
                break;
            }
            if !next.contains(&population[i]) {
                next.push(population[i].clone());
            }
        }
        for &i in order.iter().cycle().take(target - next.len()) {
            next.push(population[i].clone());
        }
    }
    Ok(next)
}

pub struct GeneticAlgorithm {
    config: GaConfig,
}

impl GeneticAlgorithm {
    pub fn new(config: GaConfig) -> Result<Self, GaError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    /// Runs `n_generations` generations. `evaluate(generation, population)`
    /// returns one cost per member, in order.
    pub fn run<E, F>(&self, mut evaluate: F) -> Result<Vec<GenerationRecord>, E>
    where
        E: From<GaError>,
        F: FnMut(usize, &[Chromosome]) -> Result<Vec<f64>, E>,
    {
        let mut rng = seed::rng_from_seed(seed::derive_named(self.config.rng_seed, "ga"));
        let mut population = init_population(&self.config, &mut rng)?;
        let mut history = Vec::with_capacity(self.config.n_generations);
        for index in 0..self.config.n_generations {
            let costs = evaluate(index, &population)?;
            if costs.len() != population.len() {
                return Err(GaError::CostCount {
                    expected: population.len(),
                    got: costs.len(),
                }
                .into());
            }
            if let Some(i) = costs.iter().position(|c| c.is_nan()) {
                return Err(GaError::NanCost(i).into());
            }
            let record = GenerationRecord::new(index, population, costs);
            population = if index + 1 < self.config.n_generations {
                next_generation(&record.population, &record.costs, &self.config, &mut rng)?
            } else {
                Vec::new()
            };
            history.push(record);
        }
        Ok(history)
    }
}

/// Minimises a deterministic or noisy function of the genes. `f` receives the
/// generation, the member index and the genes.
pub fn minimize<F>(config: GaConfig, mut f: F) -> Result<Vec<GenerationRecord>, GaError>
where
    F: FnMut(usize, usize, &[f64]) -> f64,
{
    GeneticAlgorithm::new(config)?
        .run(|generation, pop: &[Chromosome]| Ok(pop.iter().enumerate().map(|(i, x)| f(generation, i, x)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dim: usize) -> GaConfig {
        GaConfig {
            rng_seed: 5,
            ..GaConfig::new(Bounds::unit(dim))
        }
    }

    #[test]
    fn init_respects_bounds_and_seed() {
        let cfg = config(5);
        let a = init_population(&cfg, &mut seed::rng_from_seed(1)).unwrap();
        let b = init_population(&cfg, &mut seed::rng_from_seed(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 150);
        assert!(a.iter().all(|c| cfg.bounds.contains(c)));

        let point = GaConfig {
            bounds: Bounds::uniform(5, 0.3, 0.3).unwrap(),
            ..cfg
        };
        let pop = init_population(&point, &mut seed::rng_from_seed(2)).unwrap();
        assert!(pop.iter().all(|c| c == &vec![0.3; 5]));
        assert!(Bounds::new(vec![0.5], vec![0.4]).is_err());
    }

    #[test]
    fn roulette_examples() {
        assert_eq!(roulette_probabilities(&[2.0; 4]).unwrap(), vec![0.25; 4]);
        let p = roulette_probabilities(&[1.0, 3.0]).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);
        let p = roulette_probabilities(&[1.0, f64::INFINITY, 2.0]).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(roulette_probabilities(&[f64::INFINITY; 3]), Err(GaError::AllInfinite));
        let shifted = roulette_probabilities(&[-3.0, 0.0, 5.0]).unwrap();
        assert!(shifted[0] > shifted[1] && shifted[1] > shifted[2]);
    }

    #[test]
    fn crossover_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(crossover(&a, &b, 2).unwrap(), vec![1.0, 2.0, 8.0, 9.0, 10.0]);
        assert_eq!(crossover(&a, &b, 4).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 10.0]);
        assert_eq!(crossover(&a, &a, 3).unwrap(), a.to_vec());
        assert!(crossover(&a, &b, 0).is_err());
        assert!(crossover(&a, &b, 5).is_err());
    }

    #[test]
    fn adaptive_probability_examples() {
        assert_eq!(adaptive_mutation_prob(11.0, 10.0, 2.0), 0.5);
        assert_eq!(adaptive_mutation_prob(2.0, 10.0, 2.0), 0.0);
        assert_eq!(adaptive_mutation_prob(10.0, 10.0, 2.0), 0.5);
        assert_eq!(adaptive_mutation_prob(6.0, 10.0, 2.0), 0.25);
        assert_eq!(adaptive_mutation_prob(4.0, 4.0, 4.0), 0.5);
    }

    #[test]
    fn mutation_clips_and_rates() {
        let bounds = Bounds::unit(5);
        let mut rng = seed::rng_from_seed(3);
        let x = vec![1.0, 0.0, 0.5, 1.0, 0.2];
        assert_eq!(mutate(&x, 0.0, &bounds, 0.1, &mut rng), x);
        let mut changed = [0usize; 5];
        let trials = 10_000;
        for _ in 0..trials {
            let y = mutate(&x, 1.0, &bounds, 0.1, &mut rng);
            assert!(bounds.contains(&y));
            assert!(y[0] <= 1.0 && y[2] >= 0.4 && y[2] <= 0.6);
            for g in 0..5 {
                changed[g] += (y[g] != x[g]) as usize;
            }
        }
        // gene 2 sits mid-box, so every draw moves it
        assert_eq!(changed[2], trials);
        // boundary genes stay put when the step points outward (about half)
        let p = changed[0] as f64 / trials as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / trials as f64).sqrt());
    }

    #[test]
    fn next_generation_size_and_elitism() {
        let cfg = config(5);
        let mut rng = seed::rng_from_seed(9);
        for trial in 0..1000 {
            let pop_size = 1 + trial % 40;
            let cfg = GaConfig {
                population_size: pop_size,
                n_parents: ParentCount::Fixed(1 + trial % pop_size),
                ..cfg.clone()
            };
            let pop = init_population(&cfg, &mut rng).unwrap();
            let costs: Vec<f64> = pop.iter().map(|c| c.iter().sum()).collect();
            let next = next_generation(&pop, &costs, &cfg, &mut rng).unwrap();
            assert_eq!(next.len(), pop_size);
            assert!(next.contains(&pop[best_index(&costs)]));
            assert!(next.iter().all(|c| cfg.bounds.contains(c)));
        }
    }

    #[test]
    fn degenerate_settings_permute_population() {
        let cfg = GaConfig {
            population_size: 30,
            n_parents: ParentCount::Fixed(30),
            crossover_rate: 0.0,
            parent_mutation: ParentMutation::Fixed(0.0),
            ..config(5)
        };
        let mut rng = seed::rng_from_seed(4);
        let pop = init_population(&cfg, &mut rng).unwrap();
        let costs: Vec<f64> = (0..30).map(|i| 1.0 + i as f64).collect();
        let next = next_generation(&pop, &costs, &cfg, &mut rng).unwrap();
        let key = |v: &Vec<Chromosome>| {
            let mut s: Vec<String> = v.iter().map(|c| format!("{c:?}")).collect();
            s.sort();
            s
        };
        assert_eq!(key(&next), key(&pop));
    }

    #[test]
    fn fraction_parents_and_validation() {
        assert_eq!(ParentCount::Fraction(0.2).resolve(150), 30);
        let mut cfg = config(3);
        cfg.n_parents = ParentCount::Fixed(200);
        assert!(cfg.validate().is_err());
        cfg.n_parents = ParentCount::Fixed(10);
        cfg.crossover_rate = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn deterministic_best_trace_is_monotone_and_reproducible() {
        let cfg = GaConfig {
            n_generations: 40,
            population_size: 40,
            ..config(4)
        };
        let sphere = |_: usize, _: usize, x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>();
        let a = minimize(cfg.clone(), sphere).unwrap();
        let b = minimize(cfg, sphere).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        for w in a.windows(2) {
            assert!(w[1].best_cost <= w[0].best_cost);
        }
        assert!(a.iter().all(|r| r.best_cost <= r.mean_cost));
        assert!(a.last().unwrap().best_cost < a[0].best_cost);
    }

    #[test]
    fn evaluator_errors_propagate() {
        let ga = GeneticAlgorithm::new(config(2)).unwrap();
        let out: Result<_, GaError> = ga.run(|_, _| Ok(vec![1.0]));
        assert!(matches!(out, Err(GaError::CostCount { .. })));
        let out: Result<_, GaError> = ga.run(|_, pop| Ok(vec![f64::INFINITY; pop.len()]));
        assert_eq!(out.unwrap_err(), GaError::AllInfinite);
    }
}
