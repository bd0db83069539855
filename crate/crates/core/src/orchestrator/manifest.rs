use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use serde::Serialize;

use super::OrchestratorError;
use crate::cost::{load_baselines, parse_seconds, Aggregate, CostConfig, LinkBaseline, PhysicalBaselines};
use crate::ga::{ParentCount, ParentMutation};
use crate::model::{Parameter, TimeTransform};
use crate::sim::{ChainTopology, DephasingScope, NoiseMode, Schedule, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Optimize,
    Sweep,
    Validate,
    Benchmark,
}

impl FromStr for Mode {
    type Err = OrchestratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "optimize" => Ok(Mode::Optimize),
            "sweep" => Ok(Mode::Sweep),
            "validate" => Ok(Mode::Validate),
            "benchmark" => Ok(Mode::Benchmark),
            other => Err(OrchestratorError::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Optimize => "optimize",
            Mode::Sweep => "sweep",
            Mode::Validate => "validate",
            Mode::Benchmark => "benchmark",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkFunction {
    Quartic,
    Rastrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkSettings {
    pub function: BenchmarkFunction,
    pub dimension: usize,
    pub noise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Fidelity,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSettings {
    pub parameter: Parameter,
    pub metric: Metric,
    pub threshold: f64,
    pub iterations: u32,
    /// Lower end of the searched gene interval.
    pub lower: f64,
}

/// Genetic-algorithm settings; the search box comes from the baselines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaSettings {
    pub population_size: usize,
    pub n_parents: ParentCount,
    pub crossover_rate: f64,
    pub child_mutation_prob: f64,
    pub parent_mutation: ParentMutation,
    pub mutation_width: f64,
    pub n_generations: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        let d = crate::ga::GaConfig::new(crate::ga::Bounds::unit(1));
        Self {
            population_size: d.population_size,
            n_parents: d.n_parents,
            crossover_rate: d.crossover_rate,
            child_mutation_prob: d.child_mutation_prob,
            parent_mutation: d.parent_mutation,
            mutation_width: d.mutation_width,
            n_generations: d.n_generations,
        }
    }
}

/// Everything one invocation needs, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub mode: Mode,
    pub seed: u64,
    pub runs_per_individual: usize,
    pub topology_path: Option<PathBuf>,
    #[serde(skip)]
    pub topology: Option<ChainTopology>,
    pub baselines_path: Option<PathBuf>,
    pub baseline_set: Option<String>,
    /// Baselines the cost is measured against, in physical units.
    pub baselines: PhysicalBaselines,
    /// Per-link `f_el`/`p_suc` baselines; set when candidates are mapped
    /// onto links of different lengths.
    pub link_baselines: Option<Vec<LinkBaseline>>,
    pub parameters: Vec<Parameter>,
    pub time_transform: TimeTransform,
    pub simulation: SimConfig,
    pub cost: CostConfig,
    pub ga: GaSettings,
    /// Gene-space box overrides.
    pub bounds: BTreeMap<Parameter, (f64, f64)>,
    pub benchmark: BenchmarkSettings,
    pub sweep: SweepSettings,
    pub output: PathBuf,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            mode: Mode::Optimize,
            seed: 0,
            runs_per_individual: 100,
            topology_path: None,
            topology: None,
            baselines_path: None,
            baseline_set: None,
            baselines: PhysicalBaselines::default(),
            link_baselines: None,
            parameters: Parameter::ALL.to_vec(),
            time_transform: TimeTransform::Saturating,
            simulation: SimConfig::default(),
            cost: CostConfig::default(),
            ga: GaSettings::default(),
            bounds: BTreeMap::new(),
            benchmark: BenchmarkSettings {
                function: BenchmarkFunction::Rastrigin,
                dimension: 20,
                noise: true,
            },
            sweep: SweepSettings {
                parameter: Parameter::FEl,
                metric: Metric::Fidelity,
                threshold: 0.7,
                iterations: 12,
                lower: 0.0,
            },
            output: PathBuf::from("out"),
        }
    }
}

struct Reader<'a> {
    ini: &'a Ini,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, OrchestratorError> {
        self.raw(section, key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| OrchestratorError::Config(format!("[{section}] {key}: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn set<T: FromStr>(&self, section: &str, key: &str, slot: &mut T) -> Result<(), OrchestratorError> {
        if let Some(v) = self.parse(section, key)? {
            *slot = v;
        }
        Ok(())
    }

    fn choice<T: Copy>(
        &self,
        section: &str,
        key: &str,
        options: &[(&str, T)],
        slot: &mut T,
    ) -> Result<(), OrchestratorError> {
        let Some(v) = self.raw(section, key) else { return Ok(()) };
        *slot = options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                OrchestratorError::Config(format!("[{section}] {key}: `{v}` is not one of {}", names.join(", ")))
            })?;
        Ok(())
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn parse_pair(section: &str, key: &str, v: &str) -> Result<(f64, f64), OrchestratorError> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [lo, hi] => match (lo.parse(), hi.parse()) {
            (Ok(lo), Ok(hi)) => Ok((lo, hi)),
            _ => Err(OrchestratorError::Config(format!(
                "[{section}] {key}: `{v}` is not `lo, hi`"
            ))),
        },
        _ => Err(OrchestratorError::Config(format!(
            "[{section}] {key}: `{v}` is not `lo, hi`"
        ))),
    }
}

impl RunManifest {
    /// Reads a manifest; relative paths inside it are resolved against the
    /// manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, OrchestratorError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| OrchestratorError::Config(format!("{}: {e}", path.display())))?;
        Self::from_ini_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_ini_str(text: &str, base_dir: &Path) -> Result<Self, OrchestratorError> {
        let ini = Ini::load_from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        let r = Reader { ini: &ini };
        let mut m = RunManifest::default();

        r.set("run", "mode", &mut m.mode)?;
        r.set("run", "seed", &mut m.seed)?;
        r.set("run", "runs_per_individual", &mut m.runs_per_individual)?;
        if let Some(out) = r.raw("run", "output") {
            m.output = resolve(base_dir, out);
        }
        if let Some(list) = r.raw("run", "parameters") {
            m.parameters = list
                .split(',')
                .map(|s| s.trim().parse::<Parameter>())
                .collect::<Result<_, _>>()
                .map_err(|e| OrchestratorError::Config(e.to_string()))?;
        }
        r.choice(
            "run",
            "time_transform",
            &[
                ("saturating", TimeTransform::Saturating),
                ("literal", TimeTransform::Literal),
            ],
            &mut m.time_transform,
        )?;

        if let Some(t) = r.raw("run", "topology") {
            let path = resolve(base_dir, t);
            m.topology = Some(ChainTopology::load(&path)?);
            m.topology_path = Some(path);
        }

        r.choice(
            "simulation",
            "noise_mode",
            &[("full", NoiseMode::Full), ("werner", NoiseMode::Werner)],
            &mut m.simulation.noise_mode,
        )?;
        r.choice(
            "simulation",
            "dephasing_scope",
            &[
                ("attempt_windows", DephasingScope::AttemptWindows),
                ("continuous", DephasingScope::Continuous),
            ],
            &mut m.simulation.dephasing_scope,
        )?;
        r.choice(
            "simulation",
            "schedule",
            &[("sequential", Schedule::Sequential), ("greedy", Schedule::Greedy)],
            &mut m.simulation.schedule,
        )?;

        r.set("cost", "f_min", &mut m.cost.f_min)?;
        r.set("cost", "r_min", &mut m.cost.r_min)?;
        r.set("cost", "w1", &mut m.cost.w1)?;
        r.set("cost", "w2", &mut m.cost.w2)?;
        r.set("cost", "w3", &mut m.cost.w3)?;
        r.choice(
            "cost",
            "aggregate",
            &[("sum", Aggregate::Sum), ("mean", Aggregate::Mean)],
            &mut m.cost.aggregate,
        )?;

        r.set("ga", "population_size", &mut m.ga.population_size)?;
        if let Some(n) = r.parse::<usize>("ga", "n_parents")? {
            m.ga.n_parents = ParentCount::Fixed(n);
        }
        if let Some(f) = r.parse::<f64>("ga", "parent_fraction")? {
            m.ga.n_parents = ParentCount::Fraction(f);
        }
        r.set("ga", "crossover_rate", &mut m.ga.crossover_rate)?;
        r.set("ga", "child_mutation_prob", &mut m.ga.child_mutation_prob)?;
        r.set("ga", "mutation_width", &mut m.ga.mutation_width)?;
        r.set("ga", "n_generations", &mut m.ga.n_generations)?;
        if let Some(v) = r.raw("ga", "parent_mutation") {
            m.ga.parent_mutation = match v {
                "adaptive" => ParentMutation::Adaptive,
                p => ParentMutation::Fixed(p.parse().map_err(|_| {
                    OrchestratorError::Config(format!(
                        "[ga] parent_mutation: `{p}` is neither `adaptive` nor a number"
                    ))
                })?),
            };
        }

        if let Some(props) = ini.section(Some("bounds")) {
            for (key, v) in props.iter() {
                let p: Parameter = key
                    .parse()
                    .map_err(|e: crate::model::ModelError| OrchestratorError::Config(e.to_string()))?;
                m.bounds.insert(p, parse_pair("bounds", key, v)?);
            }
        }

        m.read_baselines(&r, &ini, base_dir)?;

        r.choice(
            "benchmark",
            "function",
            &[
                ("quartic", BenchmarkFunction::Quartic),
                ("rastrigin", BenchmarkFunction::Rastrigin),
            ],
            &mut m.benchmark.function,
        )?;
        m.benchmark.dimension = match m.benchmark.function {
            BenchmarkFunction::Quartic => crate::benchmark::QUARTIC_DIM,
            BenchmarkFunction::Rastrigin => crate::benchmark::RASTRIGIN_DIM,
        };
        r.set("benchmark", "dimension", &mut m.benchmark.dimension)?;
        r.set("benchmark", "noise", &mut m.benchmark.noise)?;

        if let Some(p) = r.raw("sweep", "parameter") {
            m.sweep.parameter = p
                .parse()
                .map_err(|e: crate::model::ModelError| OrchestratorError::Config(e.to_string()))?;
        }
        r.choice(
            "sweep",
            "metric",
            &[("fidelity", Metric::Fidelity), ("rate", Metric::Rate)],
            &mut m.sweep.metric,
        )?;
        r.set("sweep", "threshold", &mut m.sweep.threshold)?;
        r.set("sweep", "iterations", &mut m.sweep.iterations)?;
        r.set("sweep", "lower", &mut m.sweep.lower)?;

        m.validate()?;
        Ok(m)
    }

    fn read_baselines(&mut self, r: &Reader, ini: &Ini, base_dir: &Path) -> Result<(), OrchestratorError> {
        if let Some(file) = r.raw("run", "baselines") {
            let path = resolve(base_dir, file);
            let table = load_baselines(&path)?;
            let set = r
                .raw("run", "baseline_set")
                .map(str::to_string)
                .or_else(|| (table.len() == 1).then(|| table.keys().next().cloned()).flatten())
                .ok_or_else(|| {
                    OrchestratorError::Config("[run] baseline_set is required for multi-set baseline files".into())
                })?;
            self.baselines = table
                .get(&set)
                .cloned()
                .ok_or_else(|| OrchestratorError::Config(format!("baseline set `{set}` not in {}", path.display())))?;
            if let Some(list) = r.raw("run", "link_baselines") {
                let links =
                    list.split(',')
                        .map(str::trim)
                        .map(|name| {
                            let entry = table.get(name).ok_or_else(|| {
                                OrchestratorError::Config(format!("link baseline `{name}` not found"))
                            })?;
                            let get = |p: Parameter| {
                                entry.values.get(&p).copied().ok_or_else(|| {
                                    OrchestratorError::Config(format!("link baseline `{name}` lacks {p}"))
                                })
                            };
                            Ok(LinkBaseline {
                                name: name.to_string(),
                                f_el: get(Parameter::FEl)?,
                                p_suc: get(Parameter::PSuc)?,
                            })
                        })
                        .collect::<Result<Vec<_>, OrchestratorError>>()?;
                self.link_baselines = Some(links);
            }
            self.baselines_path = Some(path);
            self.baseline_set = Some(set);
        }
        if let Some(props) = ini.section(Some("baselines")) {
            for (key, v) in props.iter() {
                let p: Parameter = key
                    .parse()
                    .map_err(|e: crate::model::ModelError| OrchestratorError::Config(e.to_string()))?;
                let value = if p.is_time() {
                    parse_seconds(v)
                } else {
                    v.trim().parse().ok()
                }
                .ok_or_else(|| OrchestratorError::Config(format!("[baselines] {key}: cannot parse `{v}`")))?;
                self.baselines.values.insert(p, value);
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.runs_per_individual == 0 {
            return Err(OrchestratorError::Config(
                "runs_per_individual must be at least 1".into(),
            ));
        }
        if self.parameters.is_empty() {
            return Err(OrchestratorError::Config("no parameters to search".into()));
        }
        let mut seen = self.parameters.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.parameters.len() {
            return Err(OrchestratorError::Config("parameters listed twice".into()));
        }
        self.cost.validate()?;
        if !(self.sweep.lower >= 0.0 && self.sweep.lower < 1.0) {
            return Err(OrchestratorError::Config(format!(
                "[sweep] lower = {} outside [0, 1)",
                self.sweep.lower
            )));
        }
        if matches!(self.mode, Mode::Optimize | Mode::Sweep | Mode::Validate) && self.topology.is_none() {
            return Err(OrchestratorError::Config(format!(
                "{} mode needs [run] topology",
                self.mode
            )));
        }
        if let (Some(links), Some(topo)) = (&self.link_baselines, &self.topology) {
            if links.len() != topo.links().len() {
                return Err(OrchestratorError::Config(format!(
                    "{} link baselines for {} links",
                    links.len(),
                    topo.links().len()
                )));
            }
        }
        Ok(())
    }

    /// INI rendering of the resolved manifest.
    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        ini.with_section(Some("run"))
            .set("mode", self.mode.to_string())
            .set("seed", self.seed.to_string())
            .set("runs_per_individual", self.runs_per_individual.to_string())
            .set(
                "parameters",
                self.parameters.iter().map(|p| p.name()).collect::<Vec<_>>().join(", "),
            )
            .set("time_transform", snake(&self.time_transform))
            .set("output", self.output.display().to_string());
        if let Some(p) = &self.topology_path {
            ini.with_section(Some("run")).set("topology", p.display().to_string());
        }
        if let (Some(p), Some(set)) = (&self.baselines_path, &self.baseline_set) {
            ini.with_section(Some("run"))
                .set("baselines", p.display().to_string())
                .set("baseline_set", set.clone());
        }
        if let Some(links) = &self.link_baselines {
            let names: Vec<&str> = links.iter().map(|b| b.name.as_str()).collect();
            ini.with_section(Some("run")).set("link_baselines", names.join(", "));
        }
        ini.with_section(Some("simulation"))
            .set("noise_mode", snake(&self.simulation.noise_mode))
            .set("dephasing_scope", snake(&self.simulation.dephasing_scope))
            .set("schedule", snake(&self.simulation.schedule));
        ini.with_section(Some("cost"))
            .set("f_min", self.cost.f_min.to_string())
            .set("r_min", self.cost.r_min.to_string())
            .set("w1", self.cost.w1.to_string())
            .set("w2", self.cost.w2.to_string())
            .set("w3", self.cost.w3.to_string())
            .set("aggregate", snake(&self.cost.aggregate));
        let mut ga = ini.with_section(Some("ga"));
        ga.set("population_size", self.ga.population_size.to_string());
        match self.ga.n_parents {
            ParentCount::Fixed(n) => ga.set("n_parents", n.to_string()),
            ParentCount::Fraction(f) => ga.set("parent_fraction", f.to_string()),
        };
        ga.set("crossover_rate", self.ga.crossover_rate.to_string())
            .set("child_mutation_prob", self.ga.child_mutation_prob.to_string())
            .set(
                "parent_mutation",
                match self.ga.parent_mutation {
                    ParentMutation::Adaptive => "adaptive".to_string(),
                    ParentMutation::Fixed(p) => p.to_string(),
                },
            )
            .set("mutation_width", self.ga.mutation_width.to_string())
            .set("n_generations", self.ga.n_generations.to_string());
        let mut base = ini.with_section(Some("baselines"));
        for (p, v) in &self.baselines.values {
            base.set(p.name(), v.to_string());
        }
        let mut bounds = ini.with_section(Some("bounds"));
        for (p, (lo, hi)) in &self.bounds {
            bounds.set(p.name(), format!("{lo}, {hi}"));
        }
        ini.with_section(Some("benchmark"))
            .set("function", snake(&self.benchmark.function))
            .set("dimension", self.benchmark.dimension.to_string())
            .set("noise", self.benchmark.noise.to_string());
        ini.with_section(Some("sweep"))
            .set("parameter", self.sweep.parameter.name())
            .set("metric", snake(&self.sweep.metric))
            .set("threshold", self.sweep.threshold.to_string())
            .set("iterations", self.sweep.iterations.to_string())
            .set("lower", self.sweep.lower.to_string());
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is utf-8")
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}
