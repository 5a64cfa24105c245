use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Builds a point, rejecting non-finite coordinates.
    pub fn checked(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return invalid(format!("non-finite coordinate ({x}, {y})"));
        }
        Ok(Point2 { x, y })
    }

    pub fn dist2(self, o: Point2) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }

    pub fn sup_norm(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    /// The square `[-l, l]^2`.
    pub fn square(l: f64) -> Self {
        Rect::new(-l, -l, l, l)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1
    }

    pub fn inflate(&self, d: f64) -> Rect {
        Rect::new(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)
    }

    pub fn intersect(&self, o: &Rect) -> Rect {
        Rect::new(self.x0.max(o.x0), self.y0.max(o.y0), self.x1.min(o.x1), self.y1.min(o.y1))
    }

    /// Squared distance from `p` to the rectangle (zero inside).
    pub fn dist2(&self, p: Point2) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        dx * dx + dy * dy
    }

    /// Sides in the order left, right, bottom, top.
    pub fn sides(&self) -> [Segment; 4] {
        let (a, b, c, d) = (
            Point2::new(self.x0, self.y0),
            Point2::new(self.x1, self.y0),
            Point2::new(self.x1, self.y1),
            Point2::new(self.x0, self.y1),
        );
        [Segment::new(a, d), Segment::new(b, c), Segment::new(a, b), Segment::new(d, c)]
    }

    pub fn left(&self) -> Segment {
        self.sides()[0]
    }
    pub fn right(&self) -> Segment {
        self.sides()[1]
    }
    pub fn bottom(&self) -> Segment {
        self.sides()[2]
    }
    pub fn top(&self) -> Segment {
        self.sides()[3]
    }
}

/// Closed segment from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn at(&self, t: f64) -> Point2 {
        Point2::new(self.a.x + t * (self.b.x - self.a.x), self.a.y + t * (self.b.y - self.a.y))
    }

    /// Parameter interval `[t0, t1]` of the part of the segment inside the
    /// closed disk, if any.
    pub fn disk_interval(&self, c: Point2, r2: f64) -> Option<(f64, f64)> {
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let fx = self.a.x - c.x;
        let fy = self.a.y - c.y;
        let qa = dx * dx + dy * dy;
        let qb = 2.0 * (fx * dx + fy * dy);
        let qc = fx * fx + fy * fy - r2;
        if qa == 0.0 {
            return if qc <= 0.0 { Some((0.0, 1.0)) } else { None };
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let t0 = ((-qb - s) / (2.0 * qa)).max(0.0);
        let t1 = ((-qb + s) / (2.0 * qa)).min(1.0);
        if t0 <= t1 {
            Some((t0, t1))
        } else {
            None
        }
    }

    /// Squared distance from `p` to the segment.
    pub fn dist2(&self, p: Point2) -> f64 {
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let l2 = dx * dx + dy * dy;
        let t = if l2 == 0.0 {
            0.0
        } else {
            (((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / l2).clamp(0.0, 1.0)
        };
        self.at(t).dist2(p)
    }

    /// Clips an axis-aligned segment to a rectangle.
    pub fn clip_axis_aligned(&self, r: &Rect) -> Option<Segment> {
        let lo = Point2::new(self.a.x.min(self.b.x).max(r.x0), self.a.y.min(self.b.y).max(r.y0));
        let hi = Point2::new(self.a.x.max(self.b.x).min(r.x1), self.a.y.max(self.b.y).min(r.y1));
        if lo.x <= hi.x && lo.y <= hi.y {
            Some(Segment::new(lo, hi))
        } else {
            None
        }
    }
}

/// Whether two closed disks of squared radius `r2` centered at `a`, `b` have a
/// common point inside the closed rectangle. The lens is convex: it either
/// meets a side of the rectangle or, if it does not, it lies inside or outside
/// entirely, and in the first case it contains the midpoint of the centers.
pub fn lens_meets_rect(a: Point2, b: Point2, r2: f64, rect: &Rect) -> bool {
    if a.dist2(b) > 4.0 * r2 {
        return false;
    }
    if rect.contains(a.midpoint(b)) {
        return true;
    }
    for s in rect.sides() {
        if let (Some(ia), Some(ib)) = (s.disk_interval(a, r2), s.disk_interval(b, r2)) {
            if ia.0.max(ib.0) <= ia.1.min(ib.1) {
                return true;
            }
        }
    }
    false
}

/// Kind of region used by crossing and arm events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Rect,
    Annulus,
    HalfAnnulus,
    QuarterAnnulus,
}

/// A planar region: a rectangle, or an annulus `W_R \ (-r, r)^2` between two
/// concentric squares, possibly cut to the upper half plane or to the first
/// quadrant (relative to the center).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Rect(Rect),
    Annulus { center: Point2, r: f64, big_r: f64 },
    HalfAnnulus { center: Point2, r: f64, big_r: f64 },
    QuarterAnnulus { center: Point2, r: f64, big_r: f64 },
}

impl Region {
    pub fn square(l: f64) -> Region {
        Region::Rect(Rect::square(l))
    }

    /// Builds an annulus-type region, checking `0 < r < R`.
    pub fn annulus(kind: RegionKind, r: f64, big_r: f64) -> Result<Region> {
        if !(r > 0.0 && big_r > r && big_r.is_finite()) {
            return invalid(format!("annulus needs 0 < r < R, got r={r} R={big_r}"));
        }
        let center = Point2::new(0.0, 0.0);
        Ok(match kind {
            RegionKind::Annulus => Region::Annulus { center, r, big_r },
            RegionKind::HalfAnnulus => Region::HalfAnnulus { center, r, big_r },
            RegionKind::QuarterAnnulus => Region::QuarterAnnulus { center, r, big_r },
            RegionKind::Rect => return invalid("a rectangle is not an annulus"),
        })
    }

    pub fn kind(&self) -> RegionKind {
        match self {
            Region::Rect(_) => RegionKind::Rect,
            Region::Annulus { .. } => RegionKind::Annulus,
            Region::HalfAnnulus { .. } => RegionKind::HalfAnnulus,
            Region::QuarterAnnulus { .. } => RegionKind::QuarterAnnulus,
        }
    }

    /// Inner and outer radii of an annulus-type region.
    pub fn radii(&self) -> Option<(Point2, f64, f64)> {
        match *self {
            Region::Rect(_) => None,
            Region::Annulus { center, r, big_r }
            | Region::HalfAnnulus { center, r, big_r }
            | Region::QuarterAnnulus { center, r, big_r } => Some((center, r, big_r)),
        }
    }

    pub fn bounding_rect(&self) -> Rect {
        match *self {
            Region::Rect(r) => r,
            Region::Annulus { center: c, big_r, .. } => {
                Rect::new(c.x - big_r, c.y - big_r, c.x + big_r, c.y + big_r)
            }
            Region::HalfAnnulus { center: c, big_r, .. } => {
                Rect::new(c.x - big_r, c.y, c.x + big_r, c.y + big_r)
            }
            Region::QuarterAnnulus { center: c, big_r, .. } => {
                Rect::new(c.x, c.y, c.x + big_r, c.y + big_r)
            }
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match *self {
            Region::Rect(r) => r.contains(p),
            _ => {
                let (c, r, big_r) = self.radii().unwrap();
                let q = Point2::new(p.x - c.x, p.y - c.y);
                let s = q.sup_norm();
                self.bounding_rect().contains(p) && s >= r && s <= big_r
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rect(r) => r.area(),
            Region::Annulus { r, big_r, .. } => 4.0 * (big_r * big_r - r * r),
            Region::HalfAnnulus { r, big_r, .. } => 2.0 * (big_r * big_r - r * r),
            Region::QuarterAnnulus { r, big_r, .. } => big_r * big_r - r * r,
        }
    }

    /// Convex rectangular pieces covering the region. For annuli the pieces
    /// are listed counterclockwise starting with the right one.
    pub fn pieces(&self) -> Vec<Rect> {
        match *self {
            Region::Rect(r) => vec![r],
            _ => {
                let (c, r, big_r) = self.radii().unwrap();
                let b = self.bounding_rect();
                let all = [
                    Rect::new(c.x + r, c.y - big_r, c.x + big_r, c.y + big_r),
                    Rect::new(c.x - big_r, c.y + r, c.x + big_r, c.y + big_r),
                    Rect::new(c.x - big_r, c.y - big_r, c.x - r, c.y + big_r),
                    Rect::new(c.x - big_r, c.y - big_r, c.x + big_r, c.y - r),
                ];
                let n = match self.kind() {
                    RegionKind::Annulus => 4,
                    RegionKind::HalfAnnulus => 3,
                    _ => 2,
                };
                all[..n].iter().map(|p| p.intersect(&b)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lens_inside_rect_uses_midpoint() {
        let r = Rect::square(5.0);
        assert!(lens_meets_rect(Point2::new(0.0, 0.0), Point2::new(1.5, 0.0), 1.0, &r));
        assert!(!lens_meets_rect(Point2::new(0.0, 0.0), Point2::new(2.1, 0.0), 1.0, &r));
    }

    #[test]
    fn lens_outside_rect() {
        // two disks meeting just left of the rectangle's left side
        let r = Rect::new(0.0, 0.0, 4.0, 4.0);
        let a = Point2::new(-1.2, 1.0);
        let b = Point2::new(-1.2, 2.5);
        assert!(!lens_meets_rect(a, b, 1.0, &r));
        // the same pair moved right so the lens straddles the side
        let a = Point2::new(-0.5, 1.0);
        let b = Point2::new(-0.5, 2.5);
        assert!(lens_meets_rect(a, b, 1.0, &r));
    }

    #[test]
    fn annulus_pieces_cover_the_region() {
        let reg = Region::annulus(RegionKind::Annulus, 1.0, 3.0).unwrap();
        let pieces = reg.pieces();
        for i in -30..=30 {
            for j in -30..=30 {
                let p = Point2::new(i as f64 * 0.1, j as f64 * 0.1);
                let covered = pieces.iter().any(|q| q.contains(p));
                assert_eq!(covered, reg.contains(p), "{p:?}");
            }
        }
        let half = Region::annulus(RegionKind::HalfAnnulus, 1.0, 3.0).unwrap();
        assert_eq!(half.pieces().len(), 3);
        assert!((half.area() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn segment_disk_interval() {
        let s = Segment::new(Point2::new(-2.0, 0.0), Point2::new(2.0, 0.0));
        let (t0, t1) = s.disk_interval(Point2::new(0.0, 0.0), 1.0).unwrap();
        assert!((t0 - 0.25).abs() < 1e-12 && (t1 - 0.75).abs() < 1e-12);
        assert!(s.disk_interval(Point2::new(0.0, 1.5), 1.0).is_none());
    }
}
