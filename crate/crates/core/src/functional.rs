//! Functionals of point configurations: the crossing functionals of both
//! percolation models and a few simple test functionals.

use crate::boolean::{crossing_pivotals, crossing_sign};
use crate::error::{invalid, Result};
use crate::geometry::Rect;
use crate::model::{PointConfiguration, Sign};
use crate::voronoi::{cells_meeting_box, voronoi_crossing, Axis, CellView, Modified, Overlay, VoronoiTessellation};

/// Declared properties of a functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalProps {
    /// Values lie in {-1, 1}.
    pub boolean: bool,
    /// Adding a point never lowers the value.
    pub increasing: bool,
    /// Adding a black point never lowers the value and adding a white point
    /// never raises it.
    pub mark_monotone: bool,
    /// The value depends on the marks.
    pub mark_dependent: bool,
    /// Points outside this rectangle never change the value.
    pub dependence: Option<Rect>,
}

/// Evaluates a functional on every coloring of a fixed set of locations.
pub type MarkEvaluator<'a> = Box<dyn FnMut(&[Sign]) -> Result<f64> + 'a>;

/// A real functional of a finite (marked) configuration.
pub trait Functional: Sync {
    fn name(&self) -> String;
    fn props(&self) -> FunctionalProps;
    fn eval(&self, cfg: &PointConfiguration) -> Result<f64>;

    /// Indices whose removal changes the value, when a faster route than
    /// re-evaluating the functional exists.
    fn removal_pivotals(&self, _cfg: &PointConfiguration) -> Option<Result<Vec<usize>>> {
        None
    }

    /// Indices whose mark flip changes the value, when a faster route exists.
    fn flip_pivotals(&self, _cfg: &PointConfiguration) -> Option<Result<Vec<usize>>> {
        None
    }

    /// Removal and flip pivotal indices together, when both come cheaper at
    /// once.
    fn all_pivotals(&self, _cfg: &PointConfiguration) -> Option<Result<(Vec<usize>, Vec<usize>)>> {
        None
    }

    /// Evaluator over the colorings of the locations of `cfg`. Functionals
    /// with shared structure across colorings override this.
    fn mark_evaluator<'a>(&'a self, cfg: &'a PointConfiguration) -> Result<MarkEvaluator<'a>> {
        Ok(Box::new(move |s: &[Sign]| self.eval(&cfg.with_marks(s))))
    }
}

/// A constant functional.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Functional for Constant {
    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
    fn props(&self) -> FunctionalProps {
        FunctionalProps {
            boolean: self.0.abs() == 1.0,
            increasing: true,
            mark_monotone: true,
            mark_dependent: false,
            dependence: Some(Rect::new(0.0, 0.0, 0.0, 0.0)),
        }
    }
    fn eval(&self, _cfg: &PointConfiguration) -> Result<f64> {
        Ok(self.0)
    }
}

/// `2 * 1{at least `threshold` points in the box} - 1`.
#[derive(Debug, Clone, Copy)]
pub struct CountIndicator {
    pub region: Rect,
    pub threshold: usize,
}

impl Functional for CountIndicator {
    fn name(&self) -> String {
        format!("count>={}", self.threshold)
    }
    fn props(&self) -> FunctionalProps {
        FunctionalProps {
            boolean: true,
            increasing: true,
            mark_monotone: false,
            mark_dependent: false,
            dependence: Some(self.region),
        }
    }
    fn eval(&self, cfg: &PointConfiguration) -> Result<f64> {
        let k = cfg.points.iter().filter(|p| self.region.contains(p.pos)).count();
        Ok(if k >= self.threshold { 1.0 } else { -1.0 })
    }
}

/// Sign of `bias + sum of the marks of the points in the box`, with ties
/// going to +1.
#[derive(Debug, Clone, Copy)]
pub struct WeightedMajority {
    pub region: Rect,
    pub bias: f64,
}

impl Functional for WeightedMajority {
    fn name(&self) -> String {
        format!("majority(bias={})", self.bias)
    }
    fn props(&self) -> FunctionalProps {
        FunctionalProps {
            boolean: true,
            increasing: false,
            mark_monotone: true,
            mark_dependent: true,
            dependence: Some(self.region),
        }
    }
    fn eval(&self, cfg: &PointConfiguration) -> Result<f64> {
        let s: f64 = cfg.points.iter().filter(|p| self.region.contains(p.pos)).map(|p| p.mark.value()).sum();
        Ok(if s + self.bias >= 0.0 { 1.0 } else { -1.0 })
    }
}

/// Boolean model crossing functional `f_L` of `W_L`.
#[derive(Debug, Clone, Copy)]
pub struct BooleanCrossing {
    pub l: f64,
}

impl Functional for BooleanCrossing {
    fn name(&self) -> String {
        format!("boolean_crossing(L={})", self.l)
    }
    fn props(&self) -> FunctionalProps {
        FunctionalProps {
            boolean: true,
            increasing: true,
            mark_monotone: false,
            mark_dependent: false,
            dependence: Some(Rect::square(self.l + 1.0)),
        }
    }
    fn eval(&self, cfg: &PointConfiguration) -> Result<f64> {
        Ok(crossing_sign(cfg, self.l))
    }
    fn removal_pivotals(&self, cfg: &PointConfiguration) -> Option<Result<Vec<usize>>> {
        Some(Ok(crossing_pivotals(cfg, &Rect::square(self.l))))
    }
}

/// Voronoi percolation crossing functional `f_L`: +1 if black cells cross
/// `W_L` from left to right. With `certify`, configurations whose sampling
/// window is too tight to decide the crossing give a padding error.
#[derive(Debug, Clone, Copy)]
pub struct VoronoiCrossing {
    pub l: f64,
    pub certify: bool,
}

impl VoronoiCrossing {
    fn sign<V: CellView + ?Sized>(&self, view: &V) -> Result<f64> {
        let c = voronoi_crossing(view, &Rect::square(self.l), Sign::Plus, Axis::LeftRight, self.certify)?;
        Ok(if c { 1.0 } else { -1.0 })
    }

    /// Value with the tessellation already built.
    pub fn eval_tessellation(&self, t: &VoronoiTessellation) -> Result<f64> {
        self.sign(t)
    }

    /// Pivotal sets for removal and for mark flips from one tessellation.
    /// Only cells meeting the box can be pivotal: removing or recoloring any
    /// other cell leaves the box untouched.
    pub fn pivotal_sets(&self, t: &VoronoiTessellation) -> Result<(Vec<usize>, Vec<usize>)> {
        let f = self.sign(t)?;
        let cand = cells_meeting_box(t, &Rect::square(self.l))?;
        let (mut removal, mut flip) = (Vec::new(), Vec::new());
        for &c in &cand {
            let mut o = Overlay::new(t);
            o.recolor(c, t.colors[c].flip());
            if self.sign(&o)? != f {
                flip.push(c);
            }
            if self.sign(&Modified::remove(t, c)?)? != f {
                removal.push(c);
            }
        }
        Ok((removal, flip))
    }
}

impl Functional for VoronoiCrossing {
    fn name(&self) -> String {
        format!("voronoi_crossing(L={})", self.l)
    }
    fn props(&self) -> FunctionalProps {
        FunctionalProps { boolean: true, increasing: false, mark_monotone: true, mark_dependent: true, dependence: None }
    }
    fn eval(&self, cfg: &PointConfiguration) -> Result<f64> {
        self.sign(&VoronoiTessellation::build(cfg)?)
    }
    fn removal_pivotals(&self, cfg: &PointConfiguration) -> Option<Result<Vec<usize>>> {
        Some(VoronoiTessellation::build(cfg).and_then(|t| Ok(self.pivotal_sets(&t)?.0)))
    }
    fn flip_pivotals(&self, cfg: &PointConfiguration) -> Option<Result<Vec<usize>>> {
        Some(VoronoiTessellation::build(cfg).and_then(|t| Ok(self.pivotal_sets(&t)?.1)))
    }
    fn all_pivotals(&self, cfg: &PointConfiguration) -> Option<Result<(Vec<usize>, Vec<usize>)>> {
        Some(VoronoiTessellation::build(cfg).and_then(|t| self.pivotal_sets(&t)))
    }
    fn mark_evaluator<'a>(&'a self, cfg: &'a PointConfiguration) -> Result<MarkEvaluator<'a>> {
        let mut t = VoronoiTessellation::build(cfg)?;
        Ok(Box::new(move |s: &[Sign]| {
            if s.len() != t.colors.len() {
                return invalid("coloring has the wrong length");
            }
            t.colors.copy_from_slice(s);
            self.sign(&t)
        }))
    }
}

/// A functional given by a closure and declared properties.
pub struct FnFunctional<F> {
    pub name: String,
    pub props: FunctionalProps,
    pub f: F,
}

impl<F> Functional for FnFunctional<F>
where
    F: Fn(&PointConfiguration) -> Result<f64> + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }
    fn props(&self) -> FunctionalProps {
        self.props
    }
    fn eval(&self, cfg: &PointConfiguration) -> Result<f64> {
        (self.f)(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Region};
    use crate::model::{sample_poisson, voronoi_padding, MarkedPoint};
    use crate::SeedSpec;

    #[test]
    fn count_indicator_values() {
        let f = CountIndicator { region: Rect::square(1.0), threshold: 1 };
        let empty = PointConfiguration::from_locations(&[], Region::square(2.0));
        assert_eq!(f.eval(&empty).unwrap(), -1.0);
        let one = empty.with_point(MarkedPoint::new(Point2::new(0.5, 0.5), Sign::Plus));
        assert_eq!(f.eval(&one).unwrap(), 1.0);
    }

    #[test]
    fn mark_evaluator_matches_eval() {
        let cfg = sample_poisson(1.0, &Region::square(3.0), true, &SeedSpec::new(1, "fm")).unwrap();
        let f = VoronoiCrossing { l: 1.0, certify: false };
        let mut ev = f.mark_evaluator(&cfg).unwrap();
        let mut rng = SeedSpec::new(1, "fm").rng("marks");
        for _ in 0..20 {
            let s: Vec<Sign> = (0..cfg.len()).map(|_| Sign::random(&mut rng)).collect();
            assert_eq!(ev(&s).unwrap(), f.eval(&cfg.with_marks(&s)).unwrap());
        }
    }

    #[test]
    fn voronoi_fast_pivotals_match_brute_force() {
        let f = VoronoiCrossing { l: 3.0, certify: true };
        for r in 0..4 {
            let w = Region::square(3.0 + voronoi_padding(1.0));
            let cfg = sample_poisson(1.0, &w, true, &SeedSpec::new(2, "vp").replica(r)).unwrap();
            let v = f.eval(&cfg).unwrap();
            let rem = f.removal_pivotals(&cfg).unwrap().unwrap();
            let flip = f.flip_pivotals(&cfg).unwrap().unwrap();
            for i in 0..cfg.len() {
                let r = f.eval(&cfg.without(i)).unwrap() != v;
                assert_eq!(r, rem.contains(&i), "removal {i}");
                let q = f.eval(&cfg.with_mark(i, cfg.points[i].mark.flip())).unwrap() != v;
                assert_eq!(q, flip.contains(&i), "flip {i}");
            }
        }
    }
}
