//! Monte Carlo estimators with batch-means standard errors, and the replica
//! loop shared by all experiments.
//!
//! Replicas are computed in parallel but collected in index order and reduced
//! sequentially, so every estimate is bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

impl EstimatorResult {
    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.estimate.abs()
    }

    /// Number of combined standard errors between two estimates, treated as
    /// independent.
    pub fn sigma_distance(&self, other: &EstimatorResult) -> f64 {
        let s = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        let d = (self.estimate - other.estimate).abs();
        if s == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / s
        }
    }

    pub fn scale(&self, c: f64) -> EstimatorResult {
        EstimatorResult { estimate: self.estimate * c, stderr: self.stderr * c.abs(), n: self.n }
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of the mean of `v` from contiguous batch means. With fewer
/// values than batches every value is its own batch.
pub fn batch_stderr(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return f64::NAN;
    }
    let b = BATCHES.min(n);
    let mut means = Vec::with_capacity(b);
    for k in 0..b {
        let lo = k * n / b;
        let hi = (k + 1) * n / b;
        means.push(mean(&v[lo..hi]));
    }
    // unequal batch sizes differ by at most one element
    let m = mean(&means);
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Mean with batch-means standard error.
pub fn batch_means(v: &[f64]) -> EstimatorResult {
    EstimatorResult { estimate: mean(v), stderr: batch_stderr(v), n: v.len() }
}

/// Proportion with the binomial standard error.
pub fn bernoulli(hits: usize, n: usize) -> EstimatorResult {
    let p = hits as f64 / n as f64;
    EstimatorResult { estimate: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n }
}

/// Ratio of means `mean(a) / mean(b)` with a delta-method standard error.
pub fn ratio(a: &[f64], b: &[f64]) -> Result<EstimatorResult> {
    let mb = mean(b);
    if mb == 0.0 {
        return Err(crate::Error::Degenerate("ratio with zero denominator".into()));
    }
    let r = mean(a) / mb;
    let psi: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - r * y) / mb).collect();
    Ok(EstimatorResult { estimate: r, stderr: batch_stderr(&psi), n: a.len() })
}

/// Covariance of paired samples with a delta-method standard error.
pub fn covariance(a: &[f64], b: &[f64]) -> EstimatorResult {
    let (ma, mb) = (mean(a), mean(b));
    let psi: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    EstimatorResult { estimate: mean(&psi), stderr: batch_stderr(&psi), n: a.len() }
}

/// Runs `f` on replica indices `0..n` and returns the results in index order.
pub fn replica_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Like [`replica_map`] for fallible replicas; the first error by index wins.
pub fn try_replica_map<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    replica_map(n, f).into_iter().collect()
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return invalid("thread count must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Least-squares slope of `y` on `x` with its standard error, weighting each
/// point by `1 / sd^2`.
pub fn weighted_slope(x: &[f64], y: &[f64], sd: &[f64]) -> (f64, f64) {
    let w: Vec<f64> = sd.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    (sxy / sxx, (1.0 / sxx).sqrt())
}
