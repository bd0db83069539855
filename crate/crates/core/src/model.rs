//! The five-parameter abstract repeater model.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{self, BellState, QuantumError, TwoQubitState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("T2 = {t2} s exceeds 2*T1 = {} s", 2.0 * t1)]
    Unphysical { t1: f64, t2: f64 },
    #[error("{0} gene maps to an infinite coherence time")]
    InfiniteTime(Parameter),
    #[error("unknown parameter name `{0}`")]
    UnknownParameter(String),
    #[error("expected 5 genes, got {0}")]
    GeneCount(usize),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Names the five model parameters, in chromosome order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    FEl,
    PSuc,
    Sq,
    T1,
    T2,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::FEl,
        Parameter::PSuc,
        Parameter::Sq,
        Parameter::T1,
        Parameter::T2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Parameter::FEl => "f_el",
            Parameter::PSuc => "p_suc",
            Parameter::Sq => "s_q",
            Parameter::T1 => "t1",
            Parameter::T2 => "t2",
        }
    }

    pub fn is_time(self) -> bool {
        matches!(self, Parameter::T1 | Parameter::T2)
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::UnknownParameter(s.to_string()))
    }
}

/// Hardware parameters in physical units. Coherence times are in seconds and
/// may be `f64::INFINITY` for an ideal memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeaterParams {
    pub f_el: f64,
    pub p_suc: f64,
    pub s_q: f64,
    pub t1: f64,
    pub t2: f64,
}

impl RepeaterParams {
    pub fn new(f_el: f64, p_suc: f64, s_q: f64, t1: f64, t2: f64) -> Result<Self, ModelError> {
        let params = Self {
            f_el,
            p_suc,
            s_q,
            t1,
            t2,
        };
        params.validate()?;
        Ok(params)
    }

    /// Perfect hardware: unit fidelity, success and swap quality, infinite memories.
    pub fn perfect() -> Self {
        Self {
            f_el: 1.0,
            p_suc: 1.0,
            s_q: 1.0,
            t1: f64::INFINITY,
            t2: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ModelError::OutOfRange {
                    name,
                    value: v,
                    range: "[0, 1]",
                })
            }
        };
        unit("f_el", self.f_el)?;
        unit("s_q", self.s_q)?;
        if !(self.p_suc > 0.0 && self.p_suc <= 1.0) {
            return Err(ModelError::OutOfRange {
                name: "p_suc",
                value: self.p_suc,
                range: "(0, 1]",
            });
        }
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            if t.is_nan() || t <= 0.0 {
                return Err(ModelError::OutOfRange {
                    name,
                    value: t,
                    range: "(0, inf]",
                });
            }
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(ModelError::Unphysical {
                t1: self.t1,
                t2: self.t2,
            });
        }
        Ok(())
    }

    pub fn get(&self, p: Parameter) -> f64 {
        match p {
            Parameter::FEl => self.f_el,
            Parameter::PSuc => self.p_suc,
            Parameter::Sq => self.s_q,
            Parameter::T1 => self.t1,
            Parameter::T2 => self.t2,
        }
    }

    pub fn set(&mut self, p: Parameter, value: f64) {
        match p {
            Parameter::FEl => self.f_el = value,
            Parameter::PSuc => self.p_suc = value,
            Parameter::Sq => self.s_q = value,
            Parameter::T1 => self.t1 = value,
            Parameter::T2 => self.t2 = value,
        }
    }
}

/// The five model parameters mapped to `[0, 1]`, with 1 the perfect value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParams {
    genes: [f64; 5],
}

impl NormalizedParams {
    pub fn new(genes: [f64; 5]) -> Result<Self, ModelError> {
        for (p, g) in Parameter::ALL.iter().zip(genes) {
            if !(0.0..=1.0).contains(&g) {
                return Err(ModelError::OutOfRange {
                    name: p.name(),
                    value: g,
                    range: "[0, 1]",
                });
            }
        }
        Ok(Self { genes })
    }

    pub fn from_slice(genes: &[f64]) -> Result<Self, ModelError> {
        let arr: [f64; 5] = genes.try_into().map_err(|_| ModelError::GeneCount(genes.len()))?;
        Self::new(arr)
    }

    pub fn get(&self, p: Parameter) -> f64 {
        self.genes[p.index()]
    }

    pub fn genes(&self) -> &[f64; 5] {
        &self.genes
    }
}

/// How coherence times are squeezed into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeTransform {
    /// `g = T / (T + 1)`: increasing, so longer memories score closer to 1.
    #[default]
    Saturating,
    /// `g = 1 / (T + 1)`: the decreasing form, kept for comparison runs.
    Literal,
}

/// Maps a time in seconds to a gene. `t` must be non-negative; infinity maps
/// to the perfect end of the scale.
pub fn normalize_time(t: f64, transform: TimeTransform) -> Result<f64, ModelError> {
    if t.is_nan() || t < 0.0 {
        return Err(ModelError::OutOfRange {
            name: "time",
            value: t,
            range: "[0, inf]",
        });
    }
    Ok(match transform {
        TimeTransform::Saturating if t.is_infinite() => 1.0,
        TimeTransform::Saturating => t / (t + 1.0),
        TimeTransform::Literal if t.is_infinite() => 0.0,
        TimeTransform::Literal => 1.0 / (t + 1.0),
    })
}

pub fn denormalize_time(g: f64, param: Parameter, transform: TimeTransform) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&g) {
        return Err(ModelError::OutOfRange {
            name: param.name(),
            value: g,
            range: "[0, 1]",
        });
    }
    match transform {
        TimeTransform::Saturating if g == 1.0 => Err(ModelError::InfiniteTime(param)),
        TimeTransform::Saturating => Ok(g / (1.0 - g)),
        TimeTransform::Literal if g == 0.0 => Err(ModelError::InfiniteTime(param)),
        TimeTransform::Literal => Ok(1.0 / g - 1.0),
    }
}

pub fn normalize(params: &RepeaterParams) -> Result<NormalizedParams, ModelError> {
    normalize_with(params, TimeTransform::Saturating)
}

pub fn normalize_with(params: &RepeaterParams, transform: TimeTransform) -> Result<NormalizedParams, ModelError> {
    NormalizedParams::new([
        params.f_el,
        params.p_suc,
        params.s_q,
        normalize_time(params.t1, transform)?,
        normalize_time(params.t2, transform)?,
    ])
}

/// Inverse of [`normalize`]. The result is not validated against the physical
/// constraints (a zero gene gives a zero time or success probability); call
/// [`RepeaterParams::validate`] before simulating.
pub fn denormalize(genes: &NormalizedParams) -> Result<RepeaterParams, ModelError> {
    denormalize_with(genes, TimeTransform::Saturating)
}

pub fn denormalize_with(genes: &NormalizedParams, transform: TimeTransform) -> Result<RepeaterParams, ModelError> {
    Ok(RepeaterParams {
        f_el: genes.get(Parameter::FEl),
        p_suc: genes.get(Parameter::PSuc),
        s_q: genes.get(Parameter::Sq),
        t1: denormalize_time(genes.get(Parameter::T1), Parameter::T1, transform)?,
        t2: denormalize_time(genes.get(Parameter::T2), Parameter::T2, transform)?,
    })
}

/// `F |psi+><psi+| + (1 - F) |00><00|`.
pub fn elementary_link_state(f_el: f64) -> Result<TwoQubitState, ModelError> {
    if !(0.0..=1.0).contains(&f_el) {
        return Err(ModelError::OutOfRange {
            name: "f_el",
            value: f_el,
            range: "[0, 1]",
        });
    }
    let bell = quantum::bell_state(BellState::PsiPlus);
    let mut m: Matrix4<Complex64> = bell.matrix() * Complex64::new(f_el, 0.0);
    m[(0, 0)] += Complex64::new(1.0 - f_el, 0.0);
    Ok(TwoQubitState::from_raw(m))
}

/// Folds independent depolarizing error probabilities into one swap quality,
/// `prod (1 - p_i)`.
pub fn compose_swap_quality(error_probs: &[f64]) -> Result<f64, ModelError> {
    error_probs.iter().try_fold(1.0, |acc, &p| {
        if (0.0..=1.0).contains(&p) {
            Ok(acc * (1.0 - p))
        } else {
            Err(ModelError::OutOfRange {
                name: "error probability",
                value: p,
                range: "[0, 1]",
            })
        }
    })
}

/// Effective T2 that reproduces induced dephasing of `p1` per attempt when a
/// node attempts continuously with cycle time `t_cycle`.
pub fn induced_dephasing_t2(t1: f64, p1: f64, t_cycle: f64) -> Result<f64, ModelError> {
    if t1.is_nan() || t1 <= 0.0 {
        return Err(ModelError::OutOfRange {
            name: "t1",
            value: t1,
            range: "(0, inf]",
        });
    }
    if t_cycle.is_nan() || t_cycle <= 0.0 {
        return Err(ModelError::OutOfRange {
            name: "t_cycle",
            value: t_cycle,
            range: "(0, inf)",
        });
    }
    if !(0.0..0.5).contains(&p1) {
        return Err(ModelError::OutOfRange {
            name: "p1",
            value: p1,
            range: "[0, 0.5)",
        });
    }
    Ok(1.0 / (1.0 / (2.0 * t1) - (-2.0 * p1).ln_1p() / t_cycle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_state_endpoints() {
        assert_eq!(
            elementary_link_state(1.0).unwrap(),
            quantum::bell_state(BellState::PsiPlus)
        );
        assert_eq!(elementary_link_state(0.0).unwrap(), TwoQubitState::basis(0));
        assert!(elementary_link_state(1.01).is_err());
    }

    #[test]
    fn link_state_fidelity_is_argument() {
        let s = elementary_link_state(0.9698).unwrap();
        assert!((s.fidelity(BellState::PsiPlus) - 0.9698).abs() < 1e-15);
        assert!((elementary_link_state(0.9).unwrap().fidelity(BellState::PsiPlus) - 0.9).abs() < 1e-15);
        s.check().unwrap();
    }

    #[test]
    fn swap_quality_products() {
        assert_eq!(compose_swap_quality(&[]).unwrap(), 1.0);
        assert_eq!(compose_swap_quality(&[0.025]).unwrap(), 0.975);
        let sq = compose_swap_quality(&[0.025, 0.03, 0.001]).unwrap();
        assert!((sq - 0.944_804_25).abs() < 1e-15, "{sq}");
        assert!(compose_swap_quality(&[0.2, 1.5]).is_err());
    }

    #[test]
    fn induced_t2_values() {
        assert_eq!(induced_dephasing_t2(10.0, 0.0, 1e-5).unwrap(), 20.0);
        let limit = induced_dephasing_t2(1e12, 0.01, 1e-5).unwrap();
        let expected = -1e-5 / (1.0f64 - 0.02).ln();
        assert!((limit - expected).abs() / expected < 1e-9);
        let t2 = induced_dephasing_t2(36000.0, 0.01, 1e-5).unwrap();
        assert!((t2 - 4.949_831_611_221_977e-4).abs() < 1e-15, "{t2}");
        assert!(t2 <= 2.0 * 36000.0);
        assert!(induced_dephasing_t2(1.0, 0.5, 1e-5).is_err());
    }

    #[test]
    fn time_transform_values() {
        let s = TimeTransform::Saturating;
        assert_eq!(normalize_time(0.0, s).unwrap(), 0.0);
        assert_eq!(normalize_time(1.0, s).unwrap(), 0.5);
        assert!((normalize_time(36000.0, s).unwrap() - 0.999_972_222_993_805_7).abs() < 1e-15);
        assert_eq!(normalize_time(f64::INFINITY, s).unwrap(), 1.0);
        assert_eq!(normalize_time(1.0, TimeTransform::Literal).unwrap(), 0.5);
        assert_eq!(normalize_time(3.0, TimeTransform::Literal).unwrap(), 0.25);
    }

    #[test]
    fn unit_time_gene_is_infinite() {
        let genes = NormalizedParams::new([0.9, 0.5, 0.9, 1.0, 0.5]).unwrap();
        assert_eq!(denormalize(&genes), Err(ModelError::InfiniteTime(Parameter::T1)));
    }

    #[test]
    fn repeater_params_validation() {
        assert!(RepeaterParams::new(0.9, 0.0, 0.9, 1.0, 1.0).is_err());
        assert!(RepeaterParams::new(0.9, 0.5, 0.9, 1.0, 2.5).is_err());
        assert!(RepeaterParams::new(0.9, 0.5, 0.9, -1.0, 1.0).is_err());
        RepeaterParams::new(0.9, 0.5, 0.9, 1.0, 2.0).unwrap();
        RepeaterParams::perfect().validate().unwrap();
    }

    #[test]
    fn parameter_names_parse() {
        for p in Parameter::ALL {
            assert_eq!(p.name().parse::<Parameter>().unwrap(), p);
        }
        assert!("t3".parse::<Parameter>().is_err());
    }
}
