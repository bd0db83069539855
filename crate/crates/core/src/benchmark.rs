//! Test functions for the optimizer.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub const QUARTIC_DIM: usize = 30;
pub const QUARTIC_BOUND: f64 = 1.28;
pub const RASTRIGIN_DIM: usize = 20;
pub const RASTRIGIN_BOUND: f64 = 5.12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("coordinate {index} = {value} outside [-{bound}, {bound}]")]
    OutOfBox { index: usize, value: f64, bound: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
}

fn check_box(x: &[f64], bound: f64) -> Result<(), BenchmarkError> {
    match x.iter().position(|v| !(v.abs() <= bound)) {
        Some(index) => Err(BenchmarkError::OutOfBox {
            index,
            value: x[index],
            bound,
        }),
        None => Ok(()),
    }
}

/// `sum_k (k x_k^4 + N(0, 1))` for `k = 1..=d`. Without an rng the noise
/// terms are dropped.
pub fn quartic<R: Rng + ?Sized>(x: &[f64], noise: Option<&mut R>) -> Result<f64, BenchmarkError> {
    check_box(x, QUARTIC_BOUND)?;
    let clean: f64 = x.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v.powi(4)).sum();
    Ok(match noise {
        Some(rng) => clean + (0..x.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).sum::<f64>(),
        None => clean,
    })
}

/// `10 d + sum_i (x_i^2 - 10 cos(2 pi x_i))`.
pub fn rastrigin(x: &[f64]) -> Result<f64, BenchmarkError> {
    check_box(x, RASTRIGIN_BOUND)?;
    Ok(10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>())
}

/// Like [`quartic`] but insisting on the 30-dimensional form.
pub fn quartic_30<R: Rng + ?Sized>(x: &[f64], noise: Option<&mut R>) -> Result<f64, BenchmarkError> {
    if x.len() != QUARTIC_DIM {
        return Err(BenchmarkError::Dimension {
            expected: QUARTIC_DIM,
            got: x.len(),
        });
    }
    quartic(x, noise)
}

/// Like [`rastrigin`] but insisting on the 20-dimensional form.
pub fn rastrigin_20(x: &[f64]) -> Result<f64, BenchmarkError> {
    if x.len() != RASTRIGIN_DIM {
        return Err(BenchmarkError::Dimension {
            expected: RASTRIGIN_DIM,
            got: x.len(),
        });
    }
    rastrigin(x)
}
