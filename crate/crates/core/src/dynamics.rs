//! Ornstein–Uhlenbeck and frozen dynamics on marked configurations.
//!
//! Both dynamics are built from per-point uniforms drawn from the seed, so
//! calls with the same seed and different times are coupled monotonically: a
//! point dropped at time `t` stays dropped at every later time, and a fresh
//! point present at `t` is present later too.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::model::{poisson_count, uniform_in, MarkedPoint, PointConfiguration, Sign};
use crate::rng::SeedSpec;

/// A configuration and its evolution at time `t`.
#[derive(Debug, Clone)]
pub struct DynamicsCoupling {
    pub t: f64,
    pub base: PointConfiguration,
    pub evolved: PointConfiguration,
    /// Pairs `(index in base, index in evolved)` of points kept unchanged.
    pub retained: Vec<(usize, usize)>,
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return invalid(format!("time must be finite and nonnegative, got {t}"));
    }
    Ok(())
}

/// OU dynamics: each point survives with probability `e^{-t}` and an
/// independent Poisson process of intensity `(1 - e^{-t}) * intensity` with
/// fresh fair marks is added on the base window.
pub fn evolve_ou(base: &PointConfiguration, t: f64, intensity: f64, seed: &SeedSpec) -> Result<DynamicsCoupling> {
    check_time(t)?;
    if !(intensity.is_finite() && intensity >= 0.0) {
        return invalid("intensity must be finite and nonnegative");
    }
    let keep = (-t).exp();
    let mut rng = seed.rng("ou-death");
    let mut points = Vec::with_capacity(base.len());
    let mut retained = Vec::new();
    for (i, p) in base.points.iter().enumerate() {
        let u: f64 = rng.gen();
        if u < keep {
            retained.push((i, points.len()));
            points.push(*p);
        }
    }
    let bb = base.window.bounding_rect();
    let mut rng = seed.rng("ou-birth");
    let n = poisson_count(intensity * bb.area(), &mut rng)?;
    let born = 1.0 - keep;
    for _ in 0..n {
        let pos = uniform_in(&bb, &mut rng);
        let v: f64 = rng.gen();
        let mark = Sign::random(&mut rng);
        if v < born && base.window.contains(pos) {
            points.push(MarkedPoint::new(pos, if base.marked { mark } else { Sign::Plus }));
        }
    }
    let evolved = PointConfiguration::new(points, base.window, base.marked);
    Ok(DynamicsCoupling { t, base: base.clone(), evolved, retained })
}

/// Frozen dynamics: locations stay, each mark is resampled independently with
/// probability `1 - e^{-t}`.
pub fn evolve_frozen(base: &PointConfiguration, t: f64, seed: &SeedSpec) -> Result<DynamicsCoupling> {
    check_time(t)?;
    if !base.marked {
        return invalid("frozen dynamics needs a marked configuration");
    }
    let resample = 1.0 - (-t).exp();
    let mut rng = seed.rng("frozen");
    let mut evolved = base.clone();
    let mut retained = Vec::new();
    for (i, p) in evolved.points.iter_mut().enumerate() {
        let u: f64 = rng.gen();
        let fresh = Sign::random(&mut rng);
        if u < resample {
            p.mark = fresh;
        } else {
            retained.push((i, i));
        }
    }
    Ok(DynamicsCoupling { t, base: base.clone(), evolved, retained })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use crate::model::sample_poisson;

    #[test]
    fn zero_time_is_identity() {
        let s = SeedSpec::new(11, "dyn");
        let base = sample_poisson(1.0, &Region::square(3.0), true, &s).unwrap();
        let c = evolve_ou(&base, 0.0, 1.0, &s).unwrap();
        assert_eq!(c.evolved, base);
        assert_eq!(c.retained.len(), base.len());
        let f = evolve_frozen(&base, 0.0, &s).unwrap();
        assert_eq!(f.evolved, base);
    }

    #[test]
    fn large_time_replaces_everything() {
        let s = SeedSpec::new(12, "dyn");
        let base = sample_poisson(1.0, &Region::square(3.0), true, &s).unwrap();
        let c = evolve_ou(&base, 60.0, 1.0, &s).unwrap();
        assert!(c.retained.is_empty());
    }

    #[test]
    fn retained_fraction_matches_survival() {
        let s = SeedSpec::new(13, "dyn");
        let base = sample_poisson(1.0, &Region::square(30.0), true, &s).unwrap();
        let t = 0.7;
        let c = evolve_ou(&base, t, 1.0, &s).unwrap();
        let frac = c.retained.len() as f64 / base.len() as f64;
        // about 3600 points, sd of the fraction below 0.01
        assert!((frac - (-t as f64).exp()).abs() < 0.03, "{frac}");
        // stationarity: total count stays near the mean
        let n = c.evolved.len() as f64;
        assert!((n - 3600.0).abs() < 4.0 * 60.0, "{n}");
    }

    #[test]
    fn times_are_nested() {
        let s = SeedSpec::new(14, "dyn");
        let base = sample_poisson(1.0, &Region::square(4.0), true, &s).unwrap();
        let a = evolve_ou(&base, 0.3, 1.0, &s).unwrap();
        let b = evolve_ou(&base, 0.9, 1.0, &s).unwrap();
        let kept_b: Vec<usize> = b.retained.iter().map(|r| r.0).collect();
        for (i, _) in &b.retained {
            assert!(a.retained.iter().any(|r| r.0 == *i));
        }
        assert!(kept_b.len() <= a.retained.len());
    }
}
