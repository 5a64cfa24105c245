//! Add-one and remove-one costs, iterated differences, and pivotal sets.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functional::Functional;
use crate::model::{MarkedPoint, PointConfiguration};

/// Largest number of points accepted by [`iterated_difference`].
pub const MAX_ORDER: usize = 20;

/// `F(cfg + p) - F(cfg)`.
pub fn add_one_cost<F: Functional + ?Sized>(f: &F, cfg: &PointConfiguration, p: MarkedPoint) -> Result<f64> {
    let (with, _) = cfg.add_point(p)?;
    Ok(f.eval(&with)? - f.eval(cfg)?)
}

/// `F(cfg) - F(cfg - x)` for the point `x` at `idx`.
pub fn remove_one_cost<F: Functional + ?Sized>(f: &F, cfg: &PointConfiguration, idx: usize) -> Result<f64> {
    let without = cfg.remove_point(idx)?;
    Ok(f.eval(cfg)? - f.eval(&without)?)
}

/// `D_{x_1} ... D_{x_k} F(cfg)`: the alternating sum of `F` over the `2^k`
/// configurations obtained by adding subsets of the points. Each subset is
/// evaluated once. Points are put in a canonical order first, so the result
/// does not depend on the order they are given in.
pub fn iterated_difference<F: Functional + ?Sized>(
    f: &F,
    cfg: &PointConfiguration,
    points: &[MarkedPoint],
) -> Result<f64> {
    let k = points.len();
    if k > MAX_ORDER {
        return invalid(format!("iterated differences are limited to {MAX_ORDER} points, got {k}"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        a.pos.x.total_cmp(&b.pos.x).then(a.pos.y.total_cmp(&b.pos.y)).then(a.mark.value().total_cmp(&b.mark.value()))
    });
    for w in pts.windows(2) {
        if w[0].pos == w[1].pos {
            return invalid("iterated difference points must be distinct");
        }
    }
    for p in &pts {
        if cfg.points.iter().any(|q| q.pos == p.pos) {
            return invalid("iterated difference points must not be in the configuration");
        }
    }
    let mut total = 0.0;
    for mask in 0u32..(1u32 << k) {
        let mut c = cfg.clone();
        for (i, p) in pts.iter().enumerate() {
            if mask >> i & 1 == 1 {
                c.points.push(*p);
            }
        }
        let sign = if (k - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * f.eval(&c)?;
    }
    Ok(total)
}

/// Indices of pivotal points of a Boolean functional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotalSet {
    pub indices: Vec<usize>,
    /// Pivotality under mark flips rather than removal.
    pub quenched: bool,
}

impl PivotalSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of ordered `k`-tuples of distinct pivotal points.
    pub fn factorial_power(&self, k: u32) -> f64 {
        let n = self.len() as f64;
        (0..k).map(|i| (n - i as f64).max(0.0)).product()
    }
}

fn require_boolean<F: Functional + ?Sized>(f: &F) -> Result<()> {
    if !f.props().boolean {
        return invalid(format!("{} is not a Boolean functional", f.name()));
    }
    Ok(())
}

fn candidates<F: Functional + ?Sized>(f: &F, cfg: &PointConfiguration) -> Vec<usize> {
    match f.props().dependence {
        Some(r) => (0..cfg.len()).filter(|&i| r.contains(cfg.points[i].pos)).collect(),
        None => (0..cfg.len()).collect(),
    }
}

/// Points whose removal changes the sign of `F`.
pub fn pivotal_points<F: Functional + ?Sized>(f: &F, cfg: &PointConfiguration) -> Result<PivotalSet> {
    require_boolean(f)?;
    if let Some(r) = f.removal_pivotals(cfg) {
        return Ok(PivotalSet { indices: r?, quenched: false });
    }
    let v = f.eval(cfg)?;
    let mut indices = Vec::new();
    for i in candidates(f, cfg) {
        if f.eval(&cfg.without(i))? != v {
            indices.push(i);
        }
    }
    Ok(PivotalSet { indices, quenched: false })
}

/// Points whose mark flip changes the sign of `F`. Needs a marked
/// configuration.
pub fn quenched_pivotal_points<F: Functional + ?Sized>(f: &F, cfg: &PointConfiguration) -> Result<PivotalSet> {
    require_boolean(f)?;
    if !cfg.marked {
        return invalid("quenched pivotal points need a marked configuration");
    }
    if !f.props().mark_dependent {
        return Ok(PivotalSet { indices: Vec::new(), quenched: true });
    }
    if let Some(r) = f.flip_pivotals(cfg) {
        return Ok(PivotalSet { indices: r?, quenched: true });
    }
    let v = f.eval(cfg)?;
    let mut indices = Vec::new();
    for i in candidates(f, cfg) {
        if f.eval(&cfg.with_mark(i, cfg.points[i].mark.flip()))? != v {
            indices.push(i);
        }
    }
    Ok(PivotalSet { indices, quenched: true })
}

/// Removal and quenched pivotal sets of the same configuration.
pub fn pivotal_and_quenched<F: Functional + ?Sized>(f: &F, cfg: &PointConfiguration) -> Result<(PivotalSet, PivotalSet)> {
    require_boolean(f)?;
    if !cfg.marked {
        return invalid("quenched pivotal points need a marked configuration");
    }
    if let Some(r) = f.all_pivotals(cfg) {
        let (a, b) = r?;
        return Ok((PivotalSet { indices: a, quenched: false }, PivotalSet { indices: b, quenched: true }));
    }
    Ok((pivotal_points(f, cfg)?, quenched_pivotal_points(f, cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{BooleanCrossing, Constant, CountIndicator, WeightedMajority};
    use crate::geometry::{Point2, Rect, Region};
    use crate::model::{sample_poisson, Sign};
    use crate::SeedSpec;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> MarkedPoint {
        MarkedPoint::new(Point2::new(x, y), Sign::Plus)
    }

    fn empty() -> PointConfiguration {
        PointConfiguration::from_locations(&[], Region::square(3.0))
    }

    #[test]
    fn constant_has_no_differences() {
        assert_eq!(add_one_cost(&Constant(1.0), &empty(), pt(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn count_indicator_costs() {
        let f = CountIndicator { region: Rect::square(1.0), threshold: 1 };
        assert_eq!(add_one_cost(&f, &empty(), pt(0.2, 0.3)).unwrap(), 2.0);
        let one = empty().with_point(pt(0.2, 0.3));
        assert_eq!(remove_one_cost(&f, &one, 0).unwrap(), 2.0);
        assert!(remove_one_cost(&f, &empty(), 0).is_err());
        assert!(add_one_cost(&f, &one, pt(0.2, 0.3)).is_err());
        let d2 = iterated_difference(&f, &empty(), &[pt(0.1, 0.1), pt(-0.5, 0.2)]).unwrap();
        assert_eq!(d2, -2.0);
    }

    #[test]
    fn far_point_is_never_pivotal() {
        let f = BooleanCrossing { l: 2.0 };
        let cfg = sample_poisson(crate::LAMBDA_C, &Region::square(6.0), false, &SeedSpec::new(3, "far")).unwrap();
        for i in 0..cfg.len() {
            if cfg.points[i].pos.sup_norm() > 3.0 {
                assert_eq!(remove_one_cost(&f, &cfg, i).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn bridge_disk_is_pivotal() {
        // three disks across [-2, 2]^2 at height 0; the middle one bridges
        let cfg = PointConfiguration::from_locations(
            &[Point2::new(-1.6, 0.0), Point2::new(0.0, 0.0), Point2::new(1.6, 0.0)],
            Region::square(4.0),
        );
        let f = BooleanCrossing { l: 2.0 };
        assert_eq!(f.eval(&cfg).unwrap(), 1.0);
        let p = pivotal_points(&f, &cfg).unwrap();
        assert!(p.indices.contains(&1));
        for &i in &p.indices {
            assert_eq!(f.eval(&cfg.without(i)).unwrap(), -1.0);
        }
    }

    #[test]
    fn fast_boolean_pivotals_match_brute_force() {
        let f = BooleanCrossing { l: 3.0 };
        let brute = crate::functional::FnFunctional { name: "b".into(), props: f.props(), f: |c: &PointConfiguration| f.eval(c) };
        for r in 0..30 {
            let cfg = sample_poisson(crate::LAMBDA_C, &Region::square(5.0), false, &SeedSpec::new(4, "bp").replica(r))
                .unwrap();
            assert_eq!(pivotal_points(&f, &cfg).unwrap(), pivotal_points(&brute, &cfg).unwrap());
        }
    }

    #[test]
    fn quenched_needs_marks_and_a_boolean_functional() {
        let f = WeightedMajority { region: Rect::square(1.0), bias: 0.5 };
        assert!(quenched_pivotal_points(&f, &empty()).is_err());
        assert!(pivotal_points(&Constant(0.3), &empty()).is_err());
        let marked = PointConfiguration::new(vec![], Region::square(1.0), true);
        assert!(quenched_pivotal_points(&f, &marked).unwrap().is_empty());
        assert!(pivotal_points(&f, &marked).unwrap().is_empty());
    }

    #[test]
    fn factorial_powers() {
        let p = PivotalSet { indices: vec![1, 4, 7], quenched: false };
        assert_eq!(p.factorial_power(1), 3.0);
        assert_eq!(p.factorial_power(2), 6.0);
        assert_eq!(PivotalSet { indices: vec![2], quenched: true }.factorial_power(2), 0.0);
    }

    proptest! {
        #[test]
        fn add_and_remove_costs_agree(seed in 0u64..500, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let f = BooleanCrossing { l: 1.5 };
            let cfg = sample_poisson(0.8, &Region::square(3.0), false, &SeedSpec::new(seed, "pp")).unwrap();
            let p = pt(x, y);
            let (with, _) = cfg.add_point(p).unwrap();
            prop_assert_eq!(add_one_cost(&f, &cfg, p).unwrap(), remove_one_cost(&f, &with, cfg.len()).unwrap());
            prop_assert_eq!(iterated_difference(&f, &cfg, &[p]).unwrap(), add_one_cost(&f, &cfg, p).unwrap());
        }

        #[test]
        fn iterated_difference_is_symmetric(seed in 0u64..200, k in 2usize..5) {
            let f = BooleanCrossing { l: 1.5 };
            let cfg = sample_poisson(0.5, &Region::square(3.0), false, &SeedSpec::new(seed, "sym")).unwrap();
            let mut rng = SeedSpec::new(seed, "sym").rng("pts");
            use rand::Rng;
            let pts: Vec<MarkedPoint> = (0..k).map(|_| pt(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let mut rev = pts.clone();
            rev.reverse();
            let a = iterated_difference(&f, &cfg, &pts).unwrap();
            prop_assert_eq!(a.to_bits(), iterated_difference(&f, &cfg, &rev).unwrap().to_bits());
            prop_assert!(a.abs() <= (1u32 << k) as f64);
        }
    }
}
