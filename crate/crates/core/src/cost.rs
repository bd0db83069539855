//! Improvement-factor cost of hardware parameters and the penalised total cost.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::path::Path;

use ini::Ini;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_time, ModelError, NormalizedParams, Parameter, RepeaterParams, TimeTransform};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: String,
        value: f64,
        range: &'static str,
    },
    #[error("at least one cost weight must be positive")]
    NoWeights,
    #[error("baseline file: {0}")]
    Baselines(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn out_of_range(name: impl Into<String>, value: f64, range: &'static str) -> CostError {
    CostError::OutOfRange {
        name: name.into(),
        value,
        range,
    }
}

/// A cost value. Perfect parameters cost an unbounded amount, which is kept
/// apart from ordinary numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    /// `f64::INFINITY` for [`Cost::Infinite`].
    pub fn value(self) -> f64 {
        match self {
            Cost::Finite(v) => v,
            Cost::Infinite => f64::INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            Cost::Infinite
        } else {
            Cost::Finite(v)
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

fn check_open_unit(name: &str, x: f64) -> Result<(), CostError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(out_of_range(name, x, "(0, 1)"))
    }
}

/// `x_b^(1/k)`: the baseline improved by a factor `k >= 1`. An infinite
/// factor gives 1.
pub fn improve(x_b: f64, k: f64) -> Result<f64, CostError> {
    check_open_unit("baseline", x_b)?;
    if k.is_nan() || k < 1.0 {
        return Err(out_of_range("improvement factor", k, "[1, inf]"));
    }
    Ok(x_b.powf(1.0 / k))
}

/// `ln(x_b) / ln(x_new)`, the factor that takes `x_b` to `x_new`.
/// Reaching 1 is an infinite improvement.
pub fn improvement_factor(x_b: f64, x_new: f64) -> Result<Cost, CostError> {
    check_open_unit("baseline", x_b)?;
    if x_new == 1.0 {
        return Ok(Cost::Infinite);
    }
    check_open_unit("value", x_new)?;
    Ok(Cost::Finite(x_b.ln() / x_new.ln()))
}

/// Baseline values in the normalised domain, keyed by parameter. Only the
/// parameters present take part in the cost.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BaselineSet {
    values: BTreeMap<Parameter, f64>,
}

impl BaselineSet {
    pub fn new(values: BTreeMap<Parameter, f64>) -> Result<Self, CostError> {
        for (p, &v) in &values {
            check_open_unit(p.name(), v)?;
        }
        Ok(Self { values })
    }

    /// All five parameters of `params`, with times in seconds.
    pub fn from_physical(params: &RepeaterParams, transform: TimeTransform) -> Result<Self, CostError> {
        Self::from_physical_subset(params, &Parameter::ALL, transform)
    }

    pub fn from_physical_subset(
        params: &RepeaterParams,
        subset: &[Parameter],
        transform: TimeTransform,
    ) -> Result<Self, CostError> {
        let mut values = BTreeMap::new();
        for &p in subset {
            let v = params.get(p);
            let v = if p.is_time() { normalize_time(v, transform)? } else { v };
            values.insert(p, v);
        }
        Self::new(values)
    }

    pub fn get(&self, p: Parameter) -> Option<f64> {
        self.values.get(&p).copied()
    }

    pub fn parameters(&self) -> impl Iterator<Item = Parameter> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Parameter, f64)> + '_ {
        self.values.iter().map(|(&p, &v)| (p, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keeps only the listed parameters.
    pub fn restricted_to(&self, subset: &[Parameter]) -> Self {
        Self {
            values: self
                .values
                .iter()
                .filter(|(p, _)| subset.contains(p))
                .map(|(&p, &v)| (p, v))
                .collect(),
        }
    }
}

/// Parses a duration such as `36000`, `10 h`, `4.9 ms` or `2.5e-3 s` into seconds.
pub fn parse_seconds(text: &str) -> Option<f64> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let num: f64 = num.trim().parse().ok()?;
    let scale = match unit.trim() {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        "min" => 60.0,
        "h" => 3600.0,
        _ => return None,
    };
    Some(num * scale)
}

/// Physical-unit baselines read from one INI section. Any subset of `f_el`,
/// `p_suc`, `s_q`, `t1`, `t2` may appear.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PhysicalBaselines {
    pub values: BTreeMap<Parameter, f64>,
}

impl PhysicalBaselines {
    pub fn to_set(&self, transform: TimeTransform) -> Result<BaselineSet, CostError> {
        let mut out = BTreeMap::new();
        for (&p, &v) in &self.values {
            out.insert(p, if p.is_time() { normalize_time(v, transform)? } else { v });
        }
        BaselineSet::new(out)
    }

    /// Full parameter set; missing entries are an error.
    pub fn to_params(&self) -> Result<RepeaterParams, CostError> {
        let get = |p: Parameter| {
            self.values
                .get(&p)
                .copied()
                .ok_or_else(|| CostError::Baselines(format!("missing `{p}`")))
        };
        Ok(RepeaterParams::new(
            get(Parameter::FEl)?,
            get(Parameter::PSuc)?,
            get(Parameter::Sq)?,
            get(Parameter::T1)?,
            get(Parameter::T2)?,
        )?)
    }
}

/// Reads every section of a baseline file. Section names become the keys;
/// a `[shared]` section is merged into every other section.
///
/// ```text
/// [shared]
/// s_q = 0.8459
/// t1 = 10 h
/// t2 = 4.9 ms
///
/// [100km]
/// f_el = 0.90
/// p_suc = 1.5e-5
/// ```
pub fn load_baselines(path: impl AsRef<Path>) -> Result<BTreeMap<String, PhysicalBaselines>, CostError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CostError::Baselines(format!("{}: {e}", path.display())))?;
    parse_baselines(&text)
}

pub fn parse_baselines(text: &str) -> Result<BTreeMap<String, PhysicalBaselines>, CostError> {
    let ini = Ini::load_from_str(text).map_err(|e| CostError::Baselines(e.to_string()))?;
    let read = |props: &ini::Properties, into: &mut PhysicalBaselines, section: &str| {
        for (key, raw) in props.iter() {
            let p: Parameter = key.parse()?;
            let v = if p.is_time() {
                parse_seconds(raw)
            } else {
                raw.trim().parse().ok()
            }
            .ok_or_else(|| CostError::Baselines(format!("[{section}] {key}: cannot parse `{raw}`")))?;
            into.values.insert(p, v);
        }
        Ok::<_, CostError>(())
    };
    let mut shared = PhysicalBaselines::default();
    if let Some(props) = ini.section(Some("shared")) {
        read(props, &mut shared, "shared")?;
    }
    let mut out = BTreeMap::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else { continue };
        if name == "shared" {
            continue;
        }
        let mut entry = shared.clone();
        read(props, &mut entry, name)?;
        out.insert(name.to_string(), entry);
    }
    if out.is_empty() {
        return Err(CostError::Baselines("no baseline sections".into()));
    }
    Ok(out)
}

/// How the per-parameter improvement factors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub f_min: f64,
    /// Hz.
    pub r_min: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub aggregate: Aggregate,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            f_min: 0.7,
            r_min: 1.0,
            w1: 25_000.0,
            w2: 25_000.0,
            w3: 1.0,
            aggregate: Aggregate::Sum,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<(), CostError> {
        if !(0.0..=1.0).contains(&self.f_min) {
            return Err(out_of_range("f_min", self.f_min, "[0, 1]"));
        }
        if self.r_min.is_nan() || self.r_min < 0.0 {
            return Err(out_of_range("r_min", self.r_min, "[0, inf)"));
        }
        for (name, w) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3)] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(out_of_range(name, w, "[0, inf)"));
            }
        }
        if self.w1 + self.w2 + self.w3 == 0.0 {
            return Err(CostError::NoWeights);
        }
        Ok(())
    }
}

/// Sum (or mean) of the improvement factors of every parameter in `baselines`.
pub fn parameter_cost(
    baselines: &BaselineSet,
    values: &NormalizedParams,
    aggregate: Aggregate,
) -> Result<Cost, CostError> {
    let mut total = Cost::Finite(0.0);
    for (p, b) in baselines.iter() {
        total = total + improvement_factor(b, values.get(p))?;
    }
    Ok(match (aggregate, total) {
        (Aggregate::Mean, Cost::Finite(c)) if !baselines.is_empty() => Cost::Finite(c / baselines.len() as f64),
        _ => total,
    })
}

/// Heaviside step with `theta(0) = 1`.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `w1 theta(F_min - F) + w2 theta(R_min - R) + w3 C`.
pub fn total_cost(
    values: &NormalizedParams,
    baselines: &BaselineSet,
    mean_f: f64,
    rate: f64,
    config: &CostConfig,
) -> Result<Cost, CostError> {
    let c = parameter_cost(baselines, values, config.aggregate)?;
    penalized_cost(c, mean_f, rate, config)
}

/// Adds the threshold penalties to an already computed parameter cost.
pub fn penalized_cost(parameter_cost: Cost, mean_f: f64, rate: f64, config: &CostConfig) -> Result<Cost, CostError> {
    if mean_f.is_nan() {
        return Err(out_of_range("fidelity", mean_f, "[0, 1]"));
    }
    if rate.is_nan() {
        return Err(out_of_range("rate", rate, "[0, inf]"));
    }
    let penalty = config.w1 * heaviside(config.f_min - mean_f) + config.w2 * heaviside(config.r_min - rate);
    Ok(match parameter_cost {
        Cost::Finite(c) => Cost::Finite(penalty + config.w3 * c),
        Cost::Infinite => Cost::Infinite,
    })
}

/// Elementary-link baselines of one link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkBaseline {
    pub name: String,
    pub f_el: f64,
    pub p_suc: f64,
}

/// Applies the improvement factors of `candidate` over the reference
/// baselines to each link's own `f_el` and `p_suc` baselines. The other three
/// parameters are copied from `candidate`.
pub fn propagate_link_baselines(
    reference: &BaselineSet,
    candidate: &RepeaterParams,
    links: &[LinkBaseline],
) -> Result<Vec<RepeaterParams>, CostError> {
    let mut factors = Vec::new();
    for p in [Parameter::FEl, Parameter::PSuc] {
        let b = reference
            .get(p)
            .ok_or_else(|| CostError::Baselines(format!("reference baselines lack `{p}`")))?;
        factors.push(improvement_factor(b, candidate.get(p))?);
    }
    links
        .iter()
        .map(|link| {
            let mut params = *candidate;
            for (p, (k, b)) in [Parameter::FEl, Parameter::PSuc]
                .into_iter()
                .zip(factors.iter().zip([link.f_el, link.p_suc]))
            {
                check_open_unit(&format!("{} {p}", link.name), b)?;
                let v = match k {
                    Cost::Infinite => 1.0,
                    Cost::Finite(k) => b.powf(1.0 / k),
                };
                params.set(p, v);
            }
            Ok(params)
        })
        .collect()
}
