//! Arm events in square annuli.
//!
//! An arm is a path inside the annulus from its inner boundary to its outer
//! boundary that is entirely occupied or entirely vacant. For alternating
//! color patterns the event only depends on the *crossing word*: the colors
//! of the crossing clusters as met along the inner boundary,
//! counterclockwise. Two distinct crossing clusters of the same color are
//! always separated by a crossing of the other color, so the word alternates.

use serde::{Deserialize, Serialize};

use super::clusters::{occupied_clusters, PieceCover};
use super::raster::OccupancyRaster;
use crate::error::{invalid, Result};
use crate::geometry::{Point2, Rect, Region, RegionKind, Segment};
use crate::model::PointConfiguration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmColor {
    Occupied,
    Vacant,
}

impl ArmColor {
    pub fn other(self) -> ArmColor {
        match self {
            ArmColor::Occupied => ArmColor::Vacant,
            ArmColor::Vacant => ArmColor::Occupied,
        }
    }

    pub fn letter(self) -> char {
        match self {
            ArmColor::Occupied => 'O',
            ArmColor::Vacant => 'V',
        }
    }
}

/// Required arms, read counterclockwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmPattern {
    /// An explicit alternating sequence of colors.
    Sequence(Vec<ArmColor>),
    /// `j` arms of alternating colors, starting with either color.
    AlternatingAny(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmEventSpec {
    pub region: Region,
    pub pattern: ArmPattern,
}

impl ArmEventSpec {
    /// Validates the region and pattern.
    pub fn new(region: Region, pattern: ArmPattern) -> Result<Self> {
        if region.kind() == RegionKind::Rect {
            return invalid("arm events live in annulus-type regions");
        }
        let cyclic = region.kind() == RegionKind::Annulus;
        match &pattern {
            ArmPattern::Sequence(s) => {
                if s.is_empty() {
                    return invalid("empty arm pattern");
                }
                if s.windows(2).any(|w| w[0] == w[1]) {
                    return invalid("only alternating arm patterns are supported");
                }
                if cyclic && s.len() > 1 && s.len() % 2 == 1 {
                    return invalid("a cyclic alternating pattern needs an even number of arms");
                }
            }
            ArmPattern::AlternatingAny(j) => {
                if *j == 0 {
                    return invalid("empty arm pattern");
                }
                if cyclic && *j > 1 && j % 2 == 1 {
                    return invalid("a cyclic alternating pattern needs an even number of arms");
                }
            }
        }
        Ok(ArmEventSpec { region, pattern })
    }

    /// Four alternating arms in the full annulus `A(r, R)`.
    pub fn four_arm(r: f64, big_r: f64) -> Result<Self> {
        Self::new(Region::annulus(RegionKind::Annulus, r, big_r)?, ArmPattern::AlternatingAny(4))
    }

    /// Three alternating arms in the upper half annulus.
    pub fn three_arm_half(r: f64, big_r: f64) -> Result<Self> {
        Self::new(Region::annulus(RegionKind::HalfAnnulus, r, big_r)?, ArmPattern::AlternatingAny(3))
    }

    /// Two arms of different colors in the quarter annulus.
    pub fn two_arm_quarter(r: f64, big_r: f64) -> Result<Self> {
        Self::new(Region::annulus(RegionKind::QuarterAnnulus, r, big_r)?, ArmPattern::AlternatingAny(2))
    }

    /// One arm of the given color in the full annulus.
    pub fn one_arm(r: f64, big_r: f64, color: ArmColor) -> Result<Self> {
        Self::new(Region::annulus(RegionKind::Annulus, r, big_r)?, ArmPattern::Sequence(vec![color]))
    }

    /// Two arms of different colors in the full annulus.
    pub fn two_arm(r: f64, big_r: f64) -> Result<Self> {
        Self::new(Region::annulus(RegionKind::Annulus, r, big_r)?, ArmPattern::AlternatingAny(2))
    }
}

/// The alternating crossing word of a configuration in an annulus region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmWord {
    pub colors: Vec<ArmColor>,
    pub cyclic: bool,
}

impl ArmWord {
    pub fn as_string(&self) -> String {
        self.colors.iter().map(|c| c.letter()).collect()
    }

    fn is_subsequence(word: &[ArmColor], pat: &[ArmColor]) -> bool {
        let mut it = word.iter();
        pat.iter().all(|c| it.any(|w| w == c))
    }

    /// Whether the pattern appears in the word, in order (up to rotation for
    /// cyclic words).
    pub fn matches(&self, pattern: &ArmPattern) -> bool {
        let pats: Vec<Vec<ArmColor>> = match pattern {
            ArmPattern::Sequence(s) => vec![s.clone()],
            ArmPattern::AlternatingAny(j) => [ArmColor::Occupied, ArmColor::Vacant]
                .iter()
                .map(|&c0| {
                    (0..*j).map(|k| if k % 2 == 0 { c0 } else { c0.other() }).collect()
                })
                .collect(),
        };
        let n = self.colors.len();
        pats.iter().any(|p| {
            if !self.cyclic {
                return Self::is_subsequence(&self.colors, p);
            }
            (0..n.max(1)).any(|s| {
                let rot: Vec<ArmColor> = (0..n).map(|k| self.colors[(s + k) % n]).collect();
                Self::is_subsequence(&rot, p)
            })
        })
    }
}

const INNER: u32 = 1;
const OUTER: u32 = 2;
const SIDE_A: u32 = 4;
const SIDE_B: u32 = 8;

fn square_sides(c: Point2, s: f64) -> Vec<Segment> {
    Rect::new(c.x - s, c.y - s, c.x + s, c.y + s).sides().to_vec()
}

/// Rectangular cover of an annulus-type region with its boundary groups:
/// inner, outer, and for half and quarter annuli the two straight sides
/// (the first one met counterclockwise, then the last one).
pub fn annulus_cover(region: &Region) -> PieceCover {
    let (c, r, big_r) = region.radii().expect("annulus-type region");
    let mut groups = vec![square_sides(c, r), square_sides(c, big_r)];
    match region.kind() {
        RegionKind::HalfAnnulus => {
            groups.push(vec![Segment::new(Point2::new(c.x + r, c.y), Point2::new(c.x + big_r, c.y))]);
            groups.push(vec![Segment::new(Point2::new(c.x - big_r, c.y), Point2::new(c.x - r, c.y))]);
        }
        RegionKind::QuarterAnnulus => {
            groups.push(vec![Segment::new(Point2::new(c.x + r, c.y), Point2::new(c.x + big_r, c.y))]);
            groups.push(vec![Segment::new(Point2::new(c.x, c.y + r), Point2::new(c.x, c.y + big_r))]);
        }
        _ => {}
    }
    PieceCover { pieces: region.pieces(), cyclic: region.kind() == RegionKind::Annulus, groups }
}

/// Exact crossing word from the occupied clusters of the disks.
pub fn arm_word_exact(cfg: &PointConfiguration, region: &Region) -> ArmWord {
    let bb = region.bounding_rect();
    let pts: Vec<Point2> =
        cfg.points.iter().map(|p| p.pos).filter(|&p| bb.dist2(p) <= 1.0).collect();
    let cover = annulus_cover(region);
    let clusters = occupied_clusters(&pts, &cover);
    let crossing: Vec<_> = clusters.iter().filter(|c| c.touches_all(INNER | OUTER)).collect();
    let k = crossing.len();
    let o = ArmColor::Occupied;
    let v = ArmColor::Vacant;
    if region.kind() == RegionKind::Annulus {
        let wrap = clusters.iter().any(|c| c.wraps);
        let colors = match (k, wrap) {
            (0, false) => vec![v],
            (0, true) => vec![],
            (1, true) => vec![o],
            _ => (0..k).flat_map(|_| [o, v]).collect(),
        };
        return ArmWord { colors, cyclic: true };
    }
    if k == 0 {
        let blocked = clusters.iter().any(|c| c.touches_all(SIDE_A | SIDE_B));
        return ArmWord { colors: if blocked { vec![] } else { vec![v] }, cyclic: false };
    }
    let mut colors = Vec::new();
    if !crossing.iter().any(|c| c.touches & SIDE_A != 0) {
        colors.push(v);
    }
    colors.push(o);
    for _ in 1..k {
        colors.push(v);
        colors.push(o);
    }
    if !crossing.iter().any(|c| c.touches & SIDE_B != 0) {
        colors.push(v);
    }
    ArmWord { colors, cyclic: false }
}

/// Exact arm event for the disk configuration.
pub fn arm_event_exact(cfg: &PointConfiguration, spec: &ArmEventSpec) -> bool {
    arm_word_exact(cfg, &spec.region).matches(&spec.pattern)
}

/// Arm event on a raster of resolution `h`: a cell is occupied when its
/// center is covered. Occupied cells connect through 8 neighbors, vacant cells
/// through 4.
pub fn arm_event(cfg: &PointConfiguration, spec: &ArmEventSpec, h: f64) -> Result<bool> {
    Ok(arm_word_raster(cfg, &spec.region, h)?.matches(&spec.pattern))
}

/// Crossing word computed on the raster.
pub fn arm_word_raster(cfg: &PointConfiguration, region: &Region, h: f64) -> Result<ArmWord> {
    let (c, r, big_r) = match region.radii() {
        Some(x) => x,
        None => return invalid("arm words need an annulus-type region"),
    };
    if r < 2.0 * h {
        return invalid(format!("inner radius {r} is below two raster cells of size {h}"));
    }
    let bb = region.bounding_rect();
    let raster = OccupancyRaster::new(cfg, &bb, h)?;
    let (nx, ny) = (raster.nx, raster.ny);
    let domain: Vec<bool> = (0..nx * ny).map(|k| region.contains(raster.center(k % nx, k / nx))).collect();
    let labels = raster.label(&domain);
    let in_hole = |p: Point2| (p.x - c.x).abs() < r && (p.y - c.y).abs() < r;
    let mut inner_cells = Vec::new();
    let mut touches = vec![0u8; labels.count];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !domain[k] {
                continue;
            }
            let (mut inner, mut outer) = (false, false);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    let p = raster.center_signed(ii, jj);
                    if in_hole(p) {
                        inner = true;
                    } else if (p.x - c.x).abs() > big_r || (p.y - c.y).abs() > big_r {
                        outer = true;
                    }
                }
            }
            let l = labels.label[k];
            if inner {
                touches[l] |= 1;
                inner_cells.push(k);
            }
            if outer {
                touches[l] |= 2;
            }
        }
    }
    let angle = |k: usize| {
        let p = raster.center(k % nx, k / nx);
        let a = (p.y - c.y).atan2(p.x - c.x);
        // the lower half plane comes after the upper one, so that linear
        // regions read from their first side counterclockwise
        if a < 0.0 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    };
    inner_cells.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    let mut ids: Vec<usize> = Vec::new();
    for k in inner_cells {
        let l = labels.label[k];
        if touches[l] == 3 && ids.last() != Some(&l) {
            ids.push(l);
        }
    }
    let cyclic = region.kind() == RegionKind::Annulus;
    let mut colors: Vec<ArmColor> = Vec::new();
    for l in ids {
        let col = if labels.occupied[l] { ArmColor::Occupied } else { ArmColor::Vacant };
        if colors.last() != Some(&col) {
            colors.push(col);
        }
    }
    if cyclic && colors.len() > 1 && colors.first() == colors.last() {
        colors.pop();
    }
    // cyclic words start with an occupied arm, as the exact ones do
    if cyclic && colors.first() == Some(&ArmColor::Vacant) && colors.len() > 1 {
        colors.rotate_left(1);
    }
    Ok(ArmWord { colors, cyclic })
}
