//! Monte Carlo estimators of the first two factorial moments of the spectral
//! point process, computed from add-one costs:
//! `E|gamma(B)| = int_B E[(D_x F)^2] dx * intensity` and
//! `E[|gamma(B)|(|gamma(B)| - 1)] = int_{B^2} E[(D_x D_y F)^2] * intensity^2`,
//! both divided by `E[F^2]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::difference::{iterated_difference, pivotal_points};
use crate::error::{invalid, Error, Result};
use crate::functional::Functional;
use crate::geometry::{Point2, Rect, Region};
use crate::model::{sample_poisson, MarkedPoint, PointConfiguration, Sign};
use crate::rng::SeedSpec;
use crate::stats::{batch_means, mean, ratio, try_replica_map, EstimatorResult};

/// Added points per configuration in the uniform route.
pub const POINTS_PER_REPLICA: usize = 16;

/// The Poisson background the functional is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub intensity: f64,
    pub window: Region,
    pub marked: bool,
}

impl Background {
    pub fn new(intensity: f64, window: Region, marked: bool) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return invalid("intensity must be positive");
        }
        Ok(Background { intensity, window, marked })
    }

    pub fn sample(&self, seed: &SeedSpec) -> Result<PointConfiguration> {
        sample_poisson(self.intensity, &self.window, self.marked, seed)
    }

    /// A point drawn uniformly in `b` with a fair mark when marked.
    fn point<R: Rng + ?Sized>(&self, b: &Rect, rng: &mut R) -> MarkedPoint {
        let p = Point2::new(rng.gen_range(b.x0..b.x1), rng.gen_range(b.y0..b.y1));
        let m = Sign::random(rng);
        MarkedPoint::new(p, if self.marked { m } else { Sign::Plus })
    }
}

fn check_box(b: &Rect, bg: &Background) -> Result<()> {
    if b.is_empty() || b.area() == 0.0 {
        return invalid("integration box is empty");
    }
    if !bg.window.bounding_rect().contains_rect(b) {
        return invalid("integration box must lie inside the sampling window");
    }
    Ok(())
}

fn bounded(v: f64, max: f64, boolean: bool, what: &str) -> Result<f64> {
    if boolean && !(0.0..=max).contains(&v) {
        return Err(Error::Degenerate(format!("{what} = {v} outside [0, {max}] for a Boolean functional")));
    }
    Ok(v)
}

fn normalize(raw: &[f64], f2: &[f64]) -> Result<EstimatorResult> {
    if mean(f2) == 0.0 {
        return Err(Error::Degenerate("E[F^2] is zero, the spectral process is undefined".into()));
    }
    ratio(raw, f2)
}

/// Both estimates of the expected number of spectral points in a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityEstimate {
    /// `intensity * |B| * E[(D_x F)^2] / E[F^2]` with `x` uniform in `B`.
    pub uniform: EstimatorResult,
    /// `E[sum over points x in B of (F(eta) - F(eta - x))^2] / E[F^2]`,
    /// which is four times the expected number of pivotal points for a
    /// Boolean functional.
    pub mecke: EstimatorResult,
    /// Distance between the two routes in combined standard errors, from the
    /// paired per-replica difference.
    pub discrepancy_sigma: f64,
}

/// Estimates `E|gamma_F(B)|` by the uniform add-one route and by the Mecke
/// remove-one route on `n` shared configurations.
pub fn spectral_intensity_integral<F: Functional + ?Sized>(
    f: &F,
    b: &Rect,
    bg: &Background,
    n: u64,
    seed: &SeedSpec,
) -> Result<IntensityEstimate> {
    check_box(b, bg)?;
    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    let boolean = f.props().boolean;
    let mass = bg.intensity * b.area();
    let reps = try_replica_map(n, |i| {
        let s = seed.replica(i);
        let cfg = bg.sample(&s)?;
        let v = f.eval(&cfg)?;
        let mut rng = s.rng("added");
        let mut sum = 0.0;
        for _ in 0..POINTS_PER_REPLICA {
            let x = bg.point(b, &mut rng);
            let d = f.eval(&cfg.with_point(x))? - v;
            sum += bounded(d * d, 4.0, boolean, "(D_x F)^2")?;
        }
        let uniform = mass * sum / POINTS_PER_REPLICA as f64;
        let mecke = if boolean {
            let p = pivotal_points(f, &cfg)?;
            4.0 * p.indices.iter().filter(|&&k| b.contains(cfg.points[k].pos)).count() as f64
        } else {
            let mut m = 0.0;
            for k in 0..cfg.len() {
                if b.contains(cfg.points[k].pos) {
                    let d = v - f.eval(&cfg.without(k))?;
                    m += d * d;
                }
            }
            m
        };
        Ok((uniform, mecke, v * v))
    })?;
    let u: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let m: Vec<f64> = reps.iter().map(|r| r.1).collect();
    let f2: Vec<f64> = reps.iter().map(|r| r.2).collect();
    let uniform = normalize(&u, &f2)?;
    let mecke = normalize(&m, &f2)?;
    let diff: Vec<f64> = u.iter().zip(&m).map(|(a, b)| a - b).collect();
    let d = normalize(&diff, &f2)?;
    let discrepancy_sigma = if d.stderr == 0.0 {
        if d.estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d.estimate.abs() / d.stderr
    };
    Ok(IntensityEstimate { uniform, mecke, discrepancy_sigma })
}

/// First and second moments of the number of spectral points in a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentCheck {
    /// `E|gamma(B)|`.
    pub m1: EstimatorResult,
    /// `E|gamma(B)|^2`, the second factorial moment plus `m1`.
    pub m2: EstimatorResult,
    /// `m2 / m1^2`; `None` when `m1` vanishes.
    pub ratio: Option<EstimatorResult>,
}

/// Estimates `E|gamma(B)|` and `E|gamma(B)|^2` for `B = [-rho L, rho L]^2`
/// from pairs of uniform points.
pub fn second_moment_bound_check<F: Functional + ?Sized>(
    f: &F,
    l: f64,
    rho: f64,
    bg: &Background,
    n: u64,
    seed: &SeedSpec,
) -> Result<SecondMomentCheck> {
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid("rho must lie in (0, 1]");
    }
    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    let b = Rect::square(rho * l);
    check_box(&b, bg)?;
    let boolean = f.props().boolean;
    let mass = bg.intensity * b.area();
    let reps = try_replica_map(n, |i| {
        let s = seed.replica(i);
        let cfg = bg.sample(&s)?;
        let v = f.eval(&cfg)?;
        let mut rng = s.rng("pairs");
        let (mut one, mut two) = (0.0, 0.0);
        for _ in 0..POINTS_PER_REPLICA {
            let x = bg.point(&b, &mut rng);
            let y = bg.point(&b, &mut rng);
            let d1 = f.eval(&cfg.with_point(x))? - v;
            one += bounded(d1 * d1, 4.0, boolean, "(D_x F)^2")?;
            let d2 = iterated_difference(f, &cfg, &[x, y])?;
            two += bounded(d2 * d2, 16.0, boolean, "(D_x D_y F)^2")?;
        }
        let k = POINTS_PER_REPLICA as f64;
        let a = mass * one / k;
        Ok((a, mass * mass * two / k + a, v * v))
    })?;
    let a: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let c: Vec<f64> = reps.iter().map(|r| r.1).collect();
    let f2: Vec<f64> = reps.iter().map(|r| r.2).collect();
    let m1 = normalize(&a, &f2)?;
    let m2 = normalize(&c, &f2)?;
    let ratio = if m1.estimate == 0.0 {
        None
    } else {
        // delta method for mean(c) mean(f2) / mean(a)^2
        let (ma, mc, mf) = (mean(&a), mean(&c), mean(&f2));
        let r = mc * mf / (ma * ma);
        let psi: Vec<f64> = (0..a.len())
            .map(|i| r * (c[i] / mc + f2[i] / mf - 2.0 * a[i] / ma))
            .collect();
        Some(EstimatorResult { estimate: r, stderr: batch_means(&psi).stderr, n: a.len() })
    };
    Ok(SecondMomentCheck { m1, m2, ratio })
}

/// `(1 - s)^2 M1^2 / M2`, the Paley–Zygmund lower bound on `P(Z > s E Z)`.
pub fn paley_zygmund_lower_bound(m1: &EstimatorResult, m2: &EstimatorResult, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return invalid("s must lie in [0, 1)");
    }
    if !(m2.estimate > 0.0) {
        return invalid("the second moment must be positive");
    }
    Ok((1.0 - s).powi(2) * m1.estimate * m1.estimate / m2.estimate)
}

/// One row of [`second_difference_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub distance: f64,
    /// `E[(D_x D_y F)^2]`.
    pub value: EstimatorResult,
    /// The four-arm probability `alpha_4(1, distance / 4)`.
    pub alpha4: f64,
    /// `value / alpha4^2`.
    pub ratio: f64,
}

/// Scans `E[(D_x D_y F)^2]` over pair distances, with `x` uniform in
/// `[-L/2, L/2]^2` and `y` at the given distance in a uniform direction, next
/// to `alpha4(distance / 4)^2`. `alpha4` maps an outer radius to the
/// four-arm probability from radius 1; radii at most 1 use the value 1.
pub fn second_difference_scan<F, A>(
    f: &F,
    l: f64,
    distances: &[f64],
    bg: &Background,
    n: u64,
    seed: &SeedSpec,
    alpha4: A,
) -> Result<Vec<ScanRow>>
where
    F: Functional + ?Sized,
    A: Fn(f64) -> Result<f64>,
{
    if distances.iter().any(|&d| !(d >= 4.0 && d.is_finite())) {
        return invalid("pair distances must be at least 4");
    }
    if n < 2 {
        return invalid("at least two replicas are needed");
    }
    let inner = Rect::square(l / 2.0);
    check_box(&inner, bg)?;
    let boolean = f.props().boolean;
    let mut rows = Vec::with_capacity(distances.len());
    for (j, &d) in distances.iter().enumerate() {
        let s = seed.child(&format!("d{j}"));
        let vals = try_replica_map(n, |i| {
            let si = s.replica(i);
            let cfg = bg.sample(&si)?;
            let mut rng = si.rng("pair");
            let x = bg.point(&inner, &mut rng);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mut y = x;
            y.pos = Point2::new(x.pos.x + d * th.cos(), x.pos.y + d * th.sin());
            if bg.marked {
                y.mark = Sign::random(&mut rng);
            }
            let v = iterated_difference(f, &cfg, &[x, y])?;
            bounded(v * v, 16.0, boolean, "(D_x D_y F)^2")
        })?;
        let value = batch_means(&vals);
        let r = d / 4.0;
        let a = if r <= 1.0 { 1.0 } else { alpha4(r)? };
        if !(a > 0.0) {
            return Err(Error::Degenerate(format!("four-arm probability at radius {r} is zero")));
        }
        rows.push(ScanRow { distance: d, value, alpha4: a, ratio: value.estimate / (a * a) });
    }
    Ok(rows)
}
