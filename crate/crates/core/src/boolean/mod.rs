//! Boolean model: closed unit disks centered at the points of a Poisson
//! process. The occupied set is their union, the vacant set its complement.

pub mod arms;
pub mod clusters;
pub mod estimate;
pub mod raster;

pub use arms::{arm_event, arm_event_exact, arm_word_exact, arm_word_raster, ArmColor, ArmEventSpec, ArmPattern, ArmWord};
pub use clusters::{occupied_clusters, Cluster, PieceCover};
pub use estimate::{calibrate_lambda_c, estimate_arm_probability, ArmEstimate, CalibrationResult};
pub use raster::{vacant_crossing_raster, OccupancyRaster};

use crate::geometry::Rect;
use crate::model::PointConfiguration;

/// Outcome of a left-right crossing test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub crossed: bool,
    /// Set when the sampling window does not cover the box dilated by the
    /// disk radius, so disks that could matter may be missing.
    pub padding_warning: bool,
}

/// Whether the occupied set restricted to the closed box contains a path from
/// its left side to its right side. Exact: no discretization is involved.
pub fn occupied_crossing(cfg: &PointConfiguration, bx: &Rect) -> Crossing {
    let pts = relevant_locations(cfg, bx);
    let cover = clusters::rect_cover(bx);
    let crossed = occupied_clusters(&pts, &cover)
        .iter()
        .any(|c| c.touches_all(clusters::LEFT | clusters::RIGHT));
    Crossing { crossed, padding_warning: !cfg.covers(bx, 1.0) }
}

/// The crossing functional `f_L`: +1 if `W_L = [-L, L]^2` is crossed from
/// left to right by the occupied set inside it, -1 otherwise.
pub fn crossing_sign(cfg: &PointConfiguration, l: f64) -> f64 {
    if occupied_crossing(cfg, &Rect::square(l)).crossed {
        1.0
    } else {
        -1.0
    }
}

/// Indices of the points whose removal destroys the left-right crossing of
/// `bx`. Only disks of a crossing cluster can be pivotal.
pub fn crossing_pivotals(cfg: &PointConfiguration, bx: &Rect) -> Vec<usize> {
    let (pts, idx) = relevant_with_index(cfg, bx);
    let cover = clusters::rect_cover(bx);
    let cls = occupied_clusters(&pts, &cover);
    let crossing: Vec<&Cluster> =
        cls.iter().filter(|c| c.touches_all(clusters::LEFT | clusters::RIGHT)).collect();
    if crossing.len() != 1 {
        // no crossing, or two disjoint crossings: no single point is pivotal
        return Vec::new();
    }
    let mut out = Vec::new();
    let members = &crossing[0].disks;
    let mut without = Vec::with_capacity(pts.len());
    for &m in members {
        without.clear();
        without.extend(pts.iter().enumerate().filter(|(j, _)| *j != m).map(|(_, p)| *p));
        let still = occupied_clusters(&without, &cover)
            .iter()
            .any(|c| c.touches_all(clusters::LEFT | clusters::RIGHT));
        if !still {
            out.push(idx[m]);
        }
    }
    out.sort_unstable();
    out
}

fn relevant_with_index(cfg: &PointConfiguration, bx: &Rect) -> (Vec<crate::Point2>, Vec<usize>) {
    let mut pts = Vec::new();
    let mut idx = Vec::new();
    for (i, p) in cfg.points.iter().enumerate() {
        if bx.dist2(p.pos) <= 1.0 {
            pts.push(p.pos);
            idx.push(i);
        }
    }
    (pts, idx)
}

fn relevant_locations(cfg: &PointConfiguration, bx: &Rect) -> Vec<crate::Point2> {
    relevant_with_index(cfg, bx).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Region};
    use crate::model::sample_poisson;
    use crate::SeedSpec;

    #[test]
    fn straight_chain_is_crossing_and_every_disk_is_pivotal() {
        let locs: Vec<Point2> = (0..7).map(|i| Point2::new(-6.0 + 2.0 * i as f64, 0.3)).collect();
        let cfg = PointConfiguration::from_locations(&locs, Region::square(8.0));
        let bx = Rect::square(5.0);
        assert!(occupied_crossing(&cfg, &bx).crossed);
        // the end disks are redundant: their neighbours already touch the sides
        let piv = crossing_pivotals(&cfg, &bx);
        assert_eq!(piv, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn gap_blocks_crossing() {
        let mut locs: Vec<Point2> = (0..7).map(|i| Point2::new(-6.0 + 2.0 * i as f64, 0.0)).collect();
        locs[3].x += 0.01;
        let cfg = PointConfiguration::from_locations(&locs, Region::square(8.0));
        assert!(!occupied_crossing(&cfg, &Rect::square(5.0)).crossed);
    }

    #[test]
    fn padding_warning() {
        let s = SeedSpec::new(1, "pad");
        let cfg = sample_poisson(0.4, &Region::square(5.5), false, &s).unwrap();
        assert!(occupied_crossing(&cfg, &Rect::square(5.0)).padding_warning);
        let cfg = sample_poisson(0.4, &Region::square(7.0), false, &s).unwrap();
        assert!(!occupied_crossing(&cfg, &Rect::square(5.0)).padding_warning);
    }

    #[test]
    fn pivotals_match_brute_force() {
        let s = SeedSpec::new(2, "piv");
        let bx = Rect::square(4.0);
        for r in 0..40 {
            let cfg = sample_poisson(0.45, &Region::square(6.0), false, &s.replica(r)).unwrap();
            let fast = crossing_pivotals(&cfg, &bx);
            let base = occupied_crossing(&cfg, &bx).crossed;
            let brute: Vec<usize> = (0..cfg.len())
                .filter(|&i| base && !occupied_crossing(&cfg.without(i), &bx).crossed)
                .collect();
            assert_eq!(fast, brute);
        }
    }
}
