//! Monte Carlo estimation of arm probabilities and calibration of the
//! critical intensity.

use serde::{Deserialize, Serialize};

use super::arms::{arm_event, arm_event_exact, ArmEventSpec};
use super::clusters::{occupied_clusters, rect_cover, LEFT, RIGHT};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Point2, Rect, Region};
use crate::model::{sample_poisson, sample_poisson_labelled};
use crate::rng::SeedSpec;
use crate::stats::{bernoulli, replica_map, EstimatorResult};

/// How arm events are decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmDetector {
    /// Exact cluster topology of the disks.
    Exact,
    /// Raster of the given resolution.
    Raster(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmEstimate {
    pub result: EstimatorResult,
    pub hits: usize,
}

/// Margin sampled around the region: disks centered farther away cannot
/// meet it.
pub const ARM_PADDING: f64 = 2.0;

/// Estimates the probability of an arm event for the Boolean model at the
/// given intensity from `n` independent replicas.
pub fn estimate_arm_probability(
    spec: &ArmEventSpec,
    intensity: f64,
    detector: ArmDetector,
    n: u64,
    seed: &SeedSpec,
) -> Result<ArmEstimate> {
    if n == 0 {
        return invalid("at least one replica is needed");
    }
    if let ArmDetector::Raster(h) = detector {
        if !(h > 0.0 && h.is_finite()) {
            return invalid("raster resolution must be positive");
        }
    }
    let window = Region::Rect(spec.region.bounding_rect().inflate(ARM_PADDING));
    let hits = replica_map(n, |i| -> Result<bool> {
        let cfg = sample_poisson(intensity, &window, false, &seed.replica(i))?;
        match detector {
            ArmDetector::Exact => Ok(arm_event_exact(&cfg, spec)),
            ArmDetector::Raster(h) => arm_event(&cfg, spec, h),
        }
    });
    let mut count = 0;
    for h in hits {
        if h? {
            count += 1;
        }
    }
    Ok(ArmEstimate { result: bernoulli(count, n as usize), hits: count })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub lambda_c: f64,
    pub stderr: f64,
    pub sizes: Vec<f64>,
    pub replicas: u64,
}

/// Smallest fraction `q` of the label-sorted points for which the rectangle
/// `[0, 2L] x [0, L]` is crossed from left to right. Crossing is increasing,
/// so a bisection over the number of points finds it.
fn crossing_threshold(pts: &[Point2], labels: &[f64], rect: &Rect) -> f64 {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| labels[a].total_cmp(&labels[b]));
    let sorted: Vec<Point2> = order.iter().map(|&i| pts[i]).collect();
    let cover = rect_cover(rect);
    let crosses = |m: usize| {
        occupied_clusters(&sorted[..m], &cover).iter().any(|c| c.touches_all(LEFT | RIGHT))
    };
    if !crosses(sorted.len()) {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0usize, sorted.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if crosses(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    labels[order[hi - 1]]
}

fn zero_of_slope(thresholds: &[Vec<f64>], logs: &[f64], grid: &[f64]) -> Option<f64> {
    let slope_at = |q: f64| {
        let p: Vec<f64> = thresholds
            .iter()
            .map(|t| t.iter().filter(|&&x| x <= q).count() as f64 / t.len() as f64)
            .collect();
        let (s, _) = crate::stats::weighted_slope(logs, &p, &vec![1.0; p.len()]);
        s
    };
    let slopes: Vec<f64> = grid.iter().map(|&q| slope_at(q)).collect();
    if !(slopes[0] < 0.0 && *slopes.last().unwrap() > 0.0) {
        return None;
    }
    // last grid point with a negative slope and first one after it with a
    // positive slope; the zero is taken halfway
    let last_neg = slopes.iter().rposition(|&s| s < 0.0)?;
    let first_pos = slopes[last_neg..].iter().position(|&s| s > 0.0)? + last_neg;
    Some(0.5 * (grid[last_neg] + grid[first_pos]))
}

/// Estimates the critical intensity from the finite-size crossing
/// probabilities of rectangles `[0, 2L] x [0, L]`: below it they decrease in
/// `L`, above it they increase. Replicas are sampled once at the top of the
/// bracket and thinned, so every replica crosses above a threshold intensity
/// and the crossing curves are exact empirical distribution functions.
pub fn calibrate_lambda_c(
    sizes: &[f64],
    bracket: (f64, f64),
    n: u64,
    seed: &SeedSpec,
) -> Result<CalibrationResult> {
    if sizes.len() < 3 || sizes.iter().any(|&l| !(l >= 1.0)) || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("calibration needs at least three ascending sizes, each at least 1");
    }
    if !(bracket.0 > 0.0 && bracket.1 > bracket.0) {
        return invalid("calibration bracket must satisfy 0 < lo < hi");
    }
    if n < 64 {
        return invalid("calibration needs at least 64 replicas");
    }
    let hi = bracket.1;
    let thresholds: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&l| {
            let rect = Rect::new(0.0, 0.0, 2.0 * l, l);
            let window = Region::Rect(rect.inflate(1.0));
            let s = seed.child(&format!("L{l}"));
            replica_map(n, |i| -> Result<f64> {
                let (cfg, labels) = sample_poisson_labelled(hi, &window, false, &s.replica(i))?;
                Ok(crossing_threshold(&cfg.locations(), &labels, &rect) * hi)
            })
            .into_iter()
            .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = sizes.iter().map(|l| l.ln()).collect();
    let steps = 2000;
    let grid: Vec<f64> =
        (0..=steps).map(|k| bracket.0 + (hi - bracket.0) * k as f64 / steps as f64).collect();
    let lambda_c = zero_of_slope(&thresholds, &logs, &grid).ok_or_else(|| {
        Error::Calibration(format!("crossing curves do not change order inside {bracket:?}"))
    })?;
    // spread over batches of replicas
    let b = 16usize;
    let mut batch = Vec::new();
    for k in 0..b {
        let part: Vec<Vec<f64>> = thresholds
            .iter()
            .map(|t| {
                let lo = k * t.len() / b;
                let up = (k + 1) * t.len() / b;
                t[lo..up].to_vec()
            })
            .collect();
        if let Some(z) = zero_of_slope(&part, &logs, &grid) {
            batch.push(z);
        }
    }
    let m = crate::stats::mean(&batch);
    let sd = (batch.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batch.len().max(2) - 1) as f64).sqrt();
    Ok(CalibrationResult {
        lambda_c,
        stderr: sd / (batch.len().max(1) as f64).sqrt(),
        sizes: sizes.to_vec(),
        replicas: n,
    })
}
