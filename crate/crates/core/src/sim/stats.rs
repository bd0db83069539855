use serde::Serialize;

/// Batch aggregate over independent runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    pub n_runs: usize,
    pub mean_fidelity: f64,
    /// Standard error of the mean; zero for a single run.
    pub fidelity_stderr: f64,
    pub mean_time: f64,
    pub time_stderr: f64,
    /// `1 / mean_time`, in Hz.
    pub rate: f64,
    /// First-order propagation of `time_stderr`.
    pub rate_stderr: f64,
}

impl RunStats {
    /// Samples are `(fidelity, completion_time)` pairs and must be non-empty.
    /// Sums run in slice order.
    pub fn from_samples(samples: &[(f64, f64)]) -> Self {
        let n = samples.len();
        assert!(n > 0, "no samples");
        let (mean_fidelity, fidelity_stderr) = mean_stderr(samples.iter().map(|s| s.0), n);
        let (mean_time, time_stderr) = mean_stderr(samples.iter().map(|s| s.1), n);
        Self {
            n_runs: n,
            mean_fidelity,
            fidelity_stderr,
            mean_time,
            time_stderr,
            rate: 1.0 / mean_time,
            rate_stderr: time_stderr / (mean_time * mean_time),
        }
    }
}

fn mean_stderr(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
