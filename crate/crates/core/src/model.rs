use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point2, Rect, Region};
use crate::rng::SeedSpec;

/// A fair sign mark. `Plus` is black (mark 1), `Minus` is white (mark 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_bool(black: bool) -> Sign {
        if black {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_black(self) -> bool {
        self == Sign::Plus
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Sign {
        Sign::from_bool(rng.gen::<bool>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub pos: Point2,
    pub mark: Sign,
}

impl MarkedPoint {
    pub fn new(pos: Point2, mark: Sign) -> Self {
        MarkedPoint { pos, mark }
    }
}

/// A finite configuration of (possibly marked) points sampled in a window.
/// Unmarked configurations carry `Sign::Plus` on every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub points: Vec<MarkedPoint>,
    pub window: Region,
    pub marked: bool,
}

impl PointConfiguration {
    pub fn new(points: Vec<MarkedPoint>, window: Region, marked: bool) -> Self {
        PointConfiguration { points, window, marked }
    }

    /// Unmarked configuration from bare locations.
    pub fn from_locations(locs: &[Point2], window: Region) -> Self {
        let points = locs.iter().map(|&p| MarkedPoint::new(p, Sign::Plus)).collect();
        PointConfiguration { points, window, marked: false }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn locations(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.pos).collect()
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.points.iter().map(|p| p.mark).collect()
    }

    /// The configuration with `p` added.
    pub fn with_point(&self, p: MarkedPoint) -> Self {
        let mut c = self.clone();
        c.points.push(p);
        c
    }

    /// The configuration with the point at `idx` removed.
    pub fn without(&self, idx: usize) -> Self {
        let mut c = self.clone();
        c.points.remove(idx);
        c
    }

    /// The configuration with the mark at `idx` replaced.
    pub fn with_mark(&self, idx: usize, mark: Sign) -> Self {
        let mut c = self.clone();
        c.points[idx].mark = mark;
        c
    }

    pub fn with_marks(&self, marks: &[Sign]) -> Self {
        let mut c = self.clone();
        for (p, &m) in c.points.iter_mut().zip(marks) {
            p.mark = m;
        }
        c
    }

    /// Adds `p`, keeping the configuration simple. The flag tells whether `p`
    /// lies outside the sampling window, which is allowed.
    pub fn add_point(&self, p: MarkedPoint) -> Result<(Self, bool)> {
        if !(p.pos.x.is_finite() && p.pos.y.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        if self.points.iter().any(|q| q.pos == p.pos) {
            return invalid(format!("a point already sits at ({}, {})", p.pos.x, p.pos.y));
        }
        Ok((self.with_point(p), !self.window.contains(p.pos)))
    }

    /// Removes the point at `idx`.
    pub fn remove_point(&self, idx: usize) -> Result<Self> {
        if idx >= self.len() {
            return invalid(format!("index {idx} out of range for {} points", self.len()));
        }
        Ok(self.without(idx))
    }

    /// Whether the sampling window covers `r` dilated by `margin`.
    pub fn covers(&self, r: &Rect, margin: f64) -> bool {
        match self.window {
            Region::Rect(w) => w.contains_rect(&r.inflate(margin)),
            _ => false,
        }
    }
}

fn validate_intensity(intensity: f64) -> Result<()> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return invalid(format!("intensity must be finite and nonnegative, got {intensity}"));
    }
    Ok(())
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| crate::Error::Invalid(format!("poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as usize)
}

pub(crate) fn uniform_in<R: Rng + ?Sized>(r: &Rect, rng: &mut R) -> Point2 {
    Point2::new(r.x0 + rng.gen::<f64>() * r.width(), r.y0 + rng.gen::<f64>() * r.height())
}

/// Samples a Poisson process of the given intensity on `window`, with i.i.d.
/// fair marks when `marked` is set.
pub fn sample_poisson(intensity: f64, window: &Region, marked: bool, seed: &SeedSpec) -> Result<PointConfiguration> {
    sample_poisson_thinned(intensity, intensity, window, marked, seed)
}

/// Samples at `max_intensity` and keeps each point independently with
/// probability `intensity / max_intensity`. Calls with the same seed and
/// `max_intensity` are nested: a larger intensity keeps a superset of points.
pub fn sample_poisson_thinned(
    intensity: f64,
    max_intensity: f64,
    window: &Region,
    marked: bool,
    seed: &SeedSpec,
) -> Result<PointConfiguration> {
    validate_intensity(intensity)?;
    if intensity > max_intensity {
        return invalid("intensity exceeds the coupling intensity");
    }
    let (mut cfg, labels) = sample_poisson_labelled(max_intensity, window, marked, seed)?;
    let keep = if max_intensity > 0.0 { intensity / max_intensity } else { 0.0 };
    let mut it = labels.iter();
    cfg.points.retain(|_| *it.next().unwrap() < keep);
    Ok(cfg)
}

/// Samples at `max_intensity` and returns each point with a uniform label in
/// `[0, 1)`. Keeping the points with label below `q` gives the process of
/// intensity `q * max_intensity`; this is what [`sample_poisson_thinned`] does.
pub fn sample_poisson_labelled(
    max_intensity: f64,
    window: &Region,
    marked: bool,
    seed: &SeedSpec,
) -> Result<(PointConfiguration, Vec<f64>)> {
    validate_intensity(max_intensity)?;
    let bb = window.bounding_rect();
    if bb.is_empty() || !bb.area().is_finite() {
        return invalid("empty or unbounded window");
    }
    let mut rng = seed.rng("poisson");
    let n = poisson_count(max_intensity * bb.area(), &mut rng)?;
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let p = uniform_in(&bb, &mut rng);
        let u: f64 = rng.gen();
        let mark = Sign::random(&mut rng);
        if window.contains(p) {
            points.push(MarkedPoint::new(p, if marked { mark } else { Sign::Plus }));
            labels.push(u);
        }
    }
    Ok((PointConfiguration::new(points, *window, marked), labels))
}

/// Samples exactly `n` i.i.d. uniform points on a rectangular window, which is
/// the law of a Poisson process conditioned on having `n` points.
pub fn sample_binomial(n: usize, window: &Rect, marked: bool, seed: &SeedSpec) -> Result<PointConfiguration> {
    if window.is_empty() || window.area() == 0.0 {
        return invalid("empty window");
    }
    let mut rng = seed.rng("binomial");
    let points = (0..n)
        .map(|_| {
            let p = uniform_in(window, &mut rng);
            let m = Sign::random(&mut rng);
            MarkedPoint::new(p, if marked { m } else { Sign::Plus })
        })
        .collect();
    Ok(PointConfiguration::new(points, Region::Rect(*window), marked))
}

/// Default padding for the Voronoi model: wide enough that every cell meeting
/// the observation box is certified at intensity 1.
pub fn voronoi_padding(intensity: f64) -> f64 {
    (10.0 / intensity.sqrt()).max(6.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_mean_count() {
        let w = Region::square(5.0);
        let seed = SeedSpec::new(1, "count");
        let n = 2000;
        let total: usize = (0..n)
            .map(|i| sample_poisson(0.5, &w, false, &seed.replica(i)).unwrap().len())
            .sum();
        let mean = total as f64 / n as f64;
        // mean 50, stderr of the average about 0.16
        assert!((mean - 50.0).abs() < 0.8, "{mean}");
    }

    #[test]
    fn thinning_is_nested() {
        let w = Region::square(4.0);
        let seed = SeedSpec::new(3, "nest");
        let small = sample_poisson_thinned(0.2, 0.6, &w, false, &seed).unwrap();
        let large = sample_poisson_thinned(0.5, 0.6, &w, false, &seed).unwrap();
        assert!(small.len() <= large.len());
        for p in &small.points {
            assert!(large.points.contains(p));
        }
    }

    #[test]
    fn rejects_bad_intensity() {
        let w = Region::square(1.0);
        let s = SeedSpec::new(0, "x");
        assert!(sample_poisson(-1.0, &w, false, &s).is_err());
        assert!(sample_poisson(f64::NAN, &w, false, &s).is_err());
        assert!(sample_poisson(0.0, &w, false, &s).unwrap().is_empty());
    }

    #[test]
    fn add_then_remove_restores_the_configuration() {
        let c = sample_poisson(1.0, &Region::square(2.0), true, &SeedSpec::new(6, "add")).unwrap();
        let p = MarkedPoint::new(Point2::new(0.125, -0.5), Sign::Minus);
        let (d, outside) = c.add_point(p).unwrap();
        assert!(!outside);
        assert_eq!(d.remove_point(c.len()).unwrap(), c);
        assert!(d.add_point(p).is_err());
        let (_, outside) = c.add_point(MarkedPoint::new(Point2::new(2.5, 0.0), Sign::Plus)).unwrap();
        assert!(outside);
        let empty = PointConfiguration::from_locations(&[], Region::square(1.0));
        assert!(empty.remove_point(0).is_err());
    }

    #[test]
    fn same_seed_same_points() {
        let w = Region::square(3.0);
        let s = SeedSpec::new(11, "det");
        assert_eq!(sample_poisson(1.0, &w, true, &s).unwrap(), sample_poisson(1.0, &w, true, &s).unwrap());
    }

    #[test]
    fn annulus_window_restricts_points() {
        let w = Region::annulus(crate::geometry::RegionKind::Annulus, 2.0, 4.0).unwrap();
        let c = sample_poisson(2.0, &w, true, &SeedSpec::new(5, "ann")).unwrap();
        assert!(c.points.iter().all(|p| w.contains(p.pos)));
        assert!(c.points.iter().any(|p| p.mark == Sign::Minus));
    }
}
