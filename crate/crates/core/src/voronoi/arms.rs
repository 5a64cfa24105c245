//! Arm events for Voronoi percolation, with cell-path semantics: an arm is a
//! path of same-colored cells meeting the region, consecutive cells sharing a
//! Voronoi edge that meets the region, from a cell meeting the inner boundary
//! to a cell meeting the outer boundary.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{boundary_cell_walk, CellView, VoronoiTessellation};
use crate::boolean::{ArmColor, ArmEventSpec, ArmWord};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Point2, Region, RegionKind};
use crate::model::{sample_poisson, voronoi_padding};
use crate::rng::SeedSpec;
use crate::stats::{bernoulli, try_replica_map, EstimatorResult};

/// Inner radius below which a few cells already fill the hole.
pub const MIN_INNER_RADIUS: f64 = 2.0;

fn boundary_path(region: &Region, radius: f64) -> Vec<Point2> {
    let (c, _, _) = region.radii().expect("annulus-type region");
    let p = |x: f64, y: f64| Point2::new(c.x + x * radius, c.y + y * radius);
    match region.kind() {
        RegionKind::Annulus => vec![p(1.0, 0.0), p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, -1.0), p(1.0, -1.0), p(1.0, 0.0)],
        RegionKind::HalfAnnulus => vec![p(1.0, 0.0), p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, 0.0)],
        _ => vec![p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
    }
}

fn walk_path<V: CellView + ?Sized>(view: &V, path: &[Point2]) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    for w in path.windows(2) {
        for c in boundary_cell_walk(view, w[0], w[1])? {
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn edge_meets_region<V: CellView + ?Sized>(view: &V, u: usize, nb: &super::Nbr, region: &Region) -> bool {
    let g = view.edge_geometry(u, nb);
    region.pieces().iter().any(|p| g.meets_rect(p))
}

/// Alternating word of the colors of the crossing arms, read along the inner
/// boundary counterclockwise. Black cells play the occupied color.
pub fn voronoi_arm_word<V: CellView + ?Sized>(view: &V, region: &Region, certify: bool) -> Result<ArmWord> {
    let (_, r, big_r) = match region.radii() {
        Some(x) => x,
        None => return invalid("arm words need an annulus-type region"),
    };
    let inner = walk_path(view, &boundary_path(region, r))?;
    let outer = walk_path(view, &boundary_path(region, big_r))?;
    let n = view.len();
    let mut comp = vec![usize::MAX; n];
    let mut outer_hit = Vec::new();
    let mut is_outer = vec![false; n];
    for &c in &outer {
        is_outer[c] = true;
    }
    let mut queue = VecDeque::new();
    for &s in &inner {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = outer_hit.len();
        let col = view.color(s);
        let mut hit = false;
        comp[s] = id;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            if certify && !view.certified(u) {
                return Err(Error::Padding(format!("cell {u} meets the annulus but is not certified")));
            }
            hit |= is_outer[u];
            for nb in view.neighbors(u) {
                let v = nb.site;
                if comp[v] == usize::MAX
                    && view.alive(v)
                    && view.color(v) == col
                    && edge_meets_region(view, u, nb, region)
                {
                    comp[v] = id;
                    queue.push_back(v);
                }
            }
        }
        outer_hit.push(hit);
    }
    let cyclic = region.kind() == RegionKind::Annulus;
    let mut ids: Vec<usize> = Vec::new();
    for &c in &inner {
        let l = comp[c];
        if outer_hit[l] && ids.last() != Some(&l) {
            ids.push(l);
        }
    }
    let mut colors: Vec<ArmColor> = Vec::new();
    for l in ids {
        let c = inner.iter().find(|&&c| comp[c] == l).copied().unwrap();
        let col = if view.color(c).is_black() { ArmColor::Occupied } else { ArmColor::Vacant };
        if colors.last() != Some(&col) {
            colors.push(col);
        }
    }
    if cyclic && colors.len() > 1 && colors.first() == colors.last() {
        colors.pop();
    }
    if cyclic && colors.first() == Some(&ArmColor::Vacant) && colors.len() > 1 {
        colors.rotate_left(1);
    }
    Ok(ArmWord { colors, cyclic })
}

/// Whether the colored tessellation realizes the arm event.
pub fn voronoi_arm_event<V: CellView + ?Sized>(view: &V, spec: &ArmEventSpec) -> Result<bool> {
    Ok(voronoi_arm_word(view, &spec.region, true)?.matches(&spec.pattern))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiArmEstimate {
    pub result: EstimatorResult,
    pub hits: usize,
    /// Set when the inner radius is too small for cell-level arms to mean much.
    pub warning: Option<String>,
}

/// Estimates a Voronoi arm probability at intensity `intensity` and black
/// probability 1/2 from `n` replicas.
pub fn estimate_voronoi_arm_probability(
    spec: &ArmEventSpec,
    intensity: f64,
    n: u64,
    seed: &SeedSpec,
) -> Result<VoronoiArmEstimate> {
    if n == 0 {
        return invalid("at least one replica is needed");
    }
    if !(intensity > 0.0 && intensity.is_finite()) {
        return invalid("intensity must be positive");
    }
    let (_, r, _) = match spec.region.radii() {
        Some(x) => x,
        None => return invalid("arm events need an annulus-type region"),
    };
    let warning = (r * intensity.sqrt() < MIN_INNER_RADIUS)
        .then(|| format!("inner radius {r} is small compared to the cell size"));
    let window = Region::Rect(spec.region.bounding_rect().inflate(voronoi_padding(intensity)));
    let hits = try_replica_map(n, |i| {
        let cfg = sample_poisson(intensity, &window, true, &seed.replica(i))?;
        let t = VoronoiTessellation::build(&cfg)?;
        voronoi_arm_event(&t, spec)
    })?;
    let count = hits.iter().filter(|&&h| h).count();
    Ok(VoronoiArmEstimate { result: bernoulli(count, n as usize), hits: count, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::ArmPattern;
    use crate::model::{PointConfiguration, Sign};

    fn all_one_color(cfg: &PointConfiguration, s: Sign) -> PointConfiguration {
        cfg.with_marks(&vec![s; cfg.len()])
    }

    fn tess(seed: u64, big_r: f64) -> (PointConfiguration, VoronoiTessellation) {
        let w = Region::square(big_r + voronoi_padding(1.0));
        let cfg = sample_poisson(1.0, &w, true, &SeedSpec::new(seed, "varm")).unwrap();
        let t = VoronoiTessellation::build(&cfg).unwrap();
        (cfg, t)
    }

    #[test]
    fn monochrome_has_one_arm_and_no_four_arms() {
        let (cfg, _) = tess(1, 8.0);
        let black = VoronoiTessellation::build(&all_one_color(&cfg, Sign::Plus)).unwrap();
        let spec = ArmEventSpec::four_arm(2.0, 8.0).unwrap();
        let w = voronoi_arm_word(&black, &spec.region, true).unwrap();
        assert_eq!(w.as_string(), "O");
        assert!(!voronoi_arm_event(&black, &spec).unwrap());
    }

    #[test]
    fn half_plane_coloring_gives_two_arms() {
        let (cfg, _) = tess(2, 8.0);
        let marks: Vec<Sign> = cfg.points.iter().map(|p| Sign::from_bool(p.pos.x > 0.0)).collect();
        let t = VoronoiTessellation::build(&cfg.with_marks(&marks)).unwrap();
        let spec = ArmEventSpec::two_arm(2.0, 8.0).unwrap();
        assert_eq!(voronoi_arm_word(&t, &spec.region, true).unwrap().as_string(), "OV");
        assert!(voronoi_arm_event(&t, &spec).unwrap());
        let four = ArmEventSpec::four_arm(2.0, 8.0).unwrap();
        assert!(!voronoi_arm_event(&t, &four).unwrap());
    }

    #[test]
    fn quadrant_coloring_gives_four_arms() {
        let (cfg, _) = tess(3, 8.0);
        let marks: Vec<Sign> = cfg.points.iter().map(|p| Sign::from_bool(p.pos.x * p.pos.y > 0.0)).collect();
        let t = VoronoiTessellation::build(&cfg.with_marks(&marks)).unwrap();
        let spec = ArmEventSpec::four_arm(2.0, 8.0).unwrap();
        assert_eq!(voronoi_arm_word(&t, &spec.region, true).unwrap().as_string(), "OVOV");
        let half = ArmEventSpec::new(
            Region::annulus(RegionKind::HalfAnnulus, 2.0, 8.0).unwrap(),
            ArmPattern::Sequence(vec![ArmColor::Occupied, ArmColor::Vacant]),
        )
        .unwrap();
        assert!(voronoi_arm_event(&t, &half).unwrap());
    }

    #[test]
    fn small_inner_radius_warns() {
        let spec = ArmEventSpec::four_arm(1.0, 4.0).unwrap();
        let e = estimate_voronoi_arm_probability(&spec, 1.0, 4, &SeedSpec::new(4, "w")).unwrap();
        assert!(e.warning.is_some());
        let spec = ArmEventSpec::four_arm(2.0, 4.0).unwrap();
        let e = estimate_voronoi_arm_probability(&spec, 1.0, 4, &SeedSpec::new(4, "w")).unwrap();
        assert!(e.warning.is_none());
    }
}
