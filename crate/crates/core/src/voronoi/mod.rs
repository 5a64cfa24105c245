//! Poisson–Voronoi percolation: each cell is black or white according to the
//! mark of its site, and the occupied region is the union of the black cells.
//!
//! The Delaunay triangulation comes from `spade` (exact predicates). On top of
//! it sits a cell complex: for every site, its neighbors together with the
//! Delaunay triangles on both sides of the shared edge, from which the
//! Voronoi edge geometry follows. Overlays on the complex give the tessellation
//! after removing one site or recoloring sites, without rebuilding.

pub mod arms;
pub mod overlay;

pub use arms::{estimate_voronoi_arm_probability, voronoi_arm_event, voronoi_arm_word};
pub use overlay::{Modified, Overlay};

use std::collections::VecDeque;

use spade::{DelaunayTriangulation, HasPosition, Triangulation};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Point2, Rect};
use crate::model::{PointConfiguration, Sign};

/// A Delaunay triangle with its circumcircle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub verts: [usize; 3],
    pub cc: Point2,
    pub r2: f64,
}

impl Face {
    pub fn from_sites(verts: [usize; 3], p: [Point2; 3]) -> Face {
        let cc = circumcenter(p[0], p[1], p[2]);
        Face { verts, cc, r2: cc.dist2(p[0]) }
    }

    fn third(&self, a: usize, b: usize) -> usize {
        *self.verts.iter().find(|&&v| v != a && v != b).expect("triangle has a third vertex")
    }

    pub fn has(&self, v: usize) -> bool {
        self.verts.contains(&v)
    }

    /// Whether the circumdisk lies in the closed rectangle.
    pub fn disk_inside(&self, w: &Rect) -> bool {
        let r = self.r2.sqrt();
        self.cc.x - r >= w.x0 && self.cc.x + r <= w.x1 && self.cc.y - r >= w.y0 && self.cc.y + r <= w.y1
    }
}

pub fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Point2::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d)
}

/// A Delaunay neighbor of a site and the triangles on both sides of the
/// shared edge (`None` on the unbounded side of a hull edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nbr {
    pub site: usize,
    pub left: Option<u32>,
    pub right: Option<u32>,
}

/// Geometry of the Voronoi edge between two sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeGeom {
    Segment(Point2, Point2),
    Ray { origin: Point2, dir: Point2 },
    Line { point: Point2, dir: Point2 },
}

impl EdgeGeom {
    /// Whether the edge meets the closed rectangle (Liang–Barsky clipping).
    pub fn meets_rect(&self, r: &Rect) -> bool {
        let (p, d, mut t0, mut t1) = match *self {
            EdgeGeom::Segment(a, b) => (a, Point2::new(b.x - a.x, b.y - a.y), 0.0, 1.0),
            EdgeGeom::Ray { origin, dir } => (origin, dir, 0.0, f64::INFINITY),
            EdgeGeom::Line { point, dir } => (point, dir, f64::NEG_INFINITY, f64::INFINITY),
        };
        let checks = [(-d.x, p.x - r.x0), (d.x, r.x1 - p.x), (-d.y, p.y - r.y0), (d.y, r.y1 - p.y)];
        for (pk, qk) in checks {
            if pk == 0.0 {
                if qk < 0.0 {
                    return false;
                }
            } else {
                let t = qk / pk;
                if pk < 0.0 {
                    t0 = f64::max(t0, t);
                } else {
                    t1 = f64::min(t1, t);
                }
            }
        }
        t0 <= t1
    }
}

/// Read access to a colored Voronoi cell complex.
pub trait CellView {
    fn len(&self) -> usize;
    fn alive(&self, i: usize) -> bool;
    fn site(&self, i: usize) -> Point2;
    fn color(&self, i: usize) -> Sign;
    fn neighbors(&self, i: usize) -> &[Nbr];
    fn face(&self, f: u32) -> &Face;
    fn on_hull(&self, i: usize) -> bool;
    /// Window the sites were sampled in.
    fn window(&self) -> Rect;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn edge_geometry(&self, u: usize, nb: &Nbr) -> EdgeGeom {
        let (pu, pv) = (self.site(u), self.site(nb.site));
        let perp = Point2::new(-(pv.y - pu.y), pv.x - pu.x);
        let mid = pu.midpoint(pv);
        match (nb.left, nb.right) {
            (Some(a), Some(b)) => EdgeGeom::Segment(self.face(a).cc, self.face(b).cc),
            (Some(f), None) | (None, Some(f)) => {
                let fc = self.face(f);
                let pw = self.site(fc.third(u, nb.site));
                let toward = perp.x * (pw.x - mid.x) + perp.y * (pw.y - mid.y);
                let dir = if toward > 0.0 { Point2::new(-perp.x, -perp.y) } else { perp };
                EdgeGeom::Ray { origin: fc.cc, dir }
            }
            (None, None) => EdgeGeom::Line { point: mid, dir: perp },
        }
    }

    /// A cell is certified when it is bounded and every Delaunay triangle at
    /// its site has its circumdisk inside the sampling window: points outside
    /// the window then cannot change the cell.
    fn certified(&self, i: usize) -> bool {
        if self.on_hull(i) {
            return false;
        }
        let w = self.window();
        self.neighbors(i).iter().all(|nb| {
            [nb.left, nb.right].iter().all(|f| match f {
                Some(f) => self.face(*f).disk_inside(&w),
                None => false,
            })
        })
    }

    /// Index of the alive site nearest to `p`, by greedy descent on the
    /// Delaunay graph, which always reaches the nearest site.
    fn nearest(&self, p: Point2) -> Option<usize> {
        let mut cur = (0..self.len()).find(|&i| self.alive(i))?;
        let mut d = self.site(cur).dist2(p);
        loop {
            let mut next = None;
            for nb in self.neighbors(cur) {
                if !self.alive(nb.site) {
                    continue;
                }
                let e = self.site(nb.site).dist2(p);
                if e < d {
                    d = e;
                    next = Some(nb.site);
                }
            }
            match next {
                Some(n) => cur = n,
                None => return Some(cur),
            }
        }
    }
}

/// Static cell complex built from a configuration.
#[derive(Debug, Clone)]
pub struct VoronoiTessellation {
    pub sites: Vec<Point2>,
    pub colors: Vec<Sign>,
    pub alive: Vec<bool>,
    pub nbrs: Vec<Vec<Nbr>>,
    pub faces: Vec<Face>,
    pub hull: Vec<bool>,
    pub window: Rect,
}

#[derive(Clone, Copy, Debug)]
struct Site {
    pos: spade::Point2<f64>,
    idx: usize,
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> spade::Point2<f64> {
        self.pos
    }
}

impl VoronoiTessellation {
    /// Builds the tessellation of all points of `cfg`; colors come from the
    /// marks.
    pub fn build(cfg: &PointConfiguration) -> Result<Self> {
        let alive = vec![true; cfg.len()];
        Self::build_subset(&cfg.locations(), &cfg.signs(), &alive, cfg.window.bounding_rect())
    }

    /// Builds the tessellation of the alive sites, keeping the index space of
    /// `sites`.
    pub fn build_subset(sites: &[Point2], colors: &[Sign], alive: &[bool], window: Rect) -> Result<Self> {
        let n = sites.len();
        if colors.len() != n || alive.len() != n {
            return invalid("sites, colors and alive flags differ in length");
        }
        let verts: Vec<Site> = (0..n)
            .filter(|&i| alive[i])
            .map(|i| Site { pos: spade::Point2::new(sites[i].x, sites[i].y), idx: i })
            .collect();
        let count = verts.len();
        let dt = DelaunayTriangulation::<Site>::bulk_load(verts)
            .map_err(|e| Error::Invalid(format!("triangulation failed: {e:?}")))?;
        if dt.num_vertices() < count {
            return invalid("duplicate site locations");
        }
        let mut face_id = vec![u32::MAX; dt.num_all_faces()];
        let mut faces = Vec::with_capacity(dt.num_inner_faces());
        for f in dt.inner_faces() {
            let vs = f.vertices();
            let idx = [vs[0].data().idx, vs[1].data().idx, vs[2].data().idx];
            let cc = f.circumcenter();
            let cc = Point2::new(cc.x, cc.y);
            face_id[f.fix().index()] = faces.len() as u32;
            faces.push(Face { verts: idx, cc, r2: cc.dist2(sites[idx[0]]) });
        }
        let mut nbrs = vec![Vec::new(); n];
        let mut hull = vec![false; n];
        for v in dt.vertices() {
            let u = v.data().idx;
            let mut list = Vec::new();
            for e in v.out_edges() {
                let left = e.face().as_inner().map(|f| face_id[f.fix().index()]);
                let right = e.rev().face().as_inner().map(|f| face_id[f.fix().index()]);
                if left.is_none() || right.is_none() {
                    hull[u] = true;
                }
                list.push(Nbr { site: e.to().data().idx, left, right });
            }
            if list.is_empty() {
                hull[u] = true;
            }
            nbrs[u] = list;
        }
        Ok(VoronoiTessellation {
            sites: sites.to_vec(),
            colors: colors.to_vec(),
            alive: alive.to_vec(),
            nbrs,
            faces,
            hull,
            window,
        })
    }
}

impl CellView for VoronoiTessellation {
    fn len(&self) -> usize {
        self.sites.len()
    }
    fn alive(&self, i: usize) -> bool {
        self.alive[i]
    }
    fn site(&self, i: usize) -> Point2 {
        self.sites[i]
    }
    fn color(&self, i: usize) -> Sign {
        self.colors[i]
    }
    fn neighbors(&self, i: usize) -> &[Nbr] {
        &self.nbrs[i]
    }
    fn face(&self, f: u32) -> &Face {
        &self.faces[f as usize]
    }
    fn on_hull(&self, i: usize) -> bool {
        self.hull[i]
    }
    fn window(&self) -> Rect {
        self.window
    }
}

/// Ordered list of the cells met by the segment from `a` to `b`, by walking
/// from the cell of `a` across bisectors.
pub fn boundary_cell_walk<V: CellView + ?Sized>(view: &V, a: Point2, b: Point2) -> Result<Vec<usize>> {
    let w = view.window();
    if !(w.contains(a) && w.contains(b)) {
        return Err(Error::Padding("walked segment leaves the sampling window".into()));
    }
    let mut cur = match view.nearest(a) {
        Some(c) => c,
        None => return Ok(Vec::new()),
    };
    let d = Point2::new(b.x - a.x, b.y - a.y);
    let mut out = vec![cur];
    let mut t = 0.0f64;
    let limit = view.len() + 2;
    loop {
        let pu = view.site(cur);
        let mut next: Option<(f64, usize)> = None;
        for nb in view.neighbors(cur) {
            if !view.alive(nb.site) {
                continue;
            }
            let pv = view.site(nb.site);
            let (wx, wy) = (pv.x - pu.x, pv.y - pu.y);
            let den = 2.0 * (d.x * wx + d.y * wy);
            if den <= 0.0 {
                continue;
            }
            let num = (pv.x * pv.x + pv.y * pv.y) - (pu.x * pu.x + pu.y * pu.y) - 2.0 * (a.x * wx + a.y * wy);
            let ts = num / den;
            if ts >= t && next.is_none_or(|(bt, _)| ts < bt) {
                next = Some((ts, nb.site));
            }
        }
        match next {
            Some((ts, v)) if ts <= 1.0 => {
                t = ts;
                cur = v;
                out.push(v);
                if out.len() > limit {
                    return Err(Error::Degenerate("cell walk does not terminate".into()));
                }
            }
            _ => break,
        }
    }
    Ok(out)
}

/// Crossing direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    LeftRight,
    TopBottom,
}

/// Whether a path of cells of `color`, consecutive cells sharing a Voronoi
/// edge that meets the closed box, joins the two opposite sides of the box.
/// With `certify`, every cell the answer depends on must be certified, or a
/// padding error is returned.
pub fn voronoi_crossing<V: CellView + ?Sized>(
    view: &V,
    bx: &Rect,
    color: Sign,
    axis: Axis,
    certify: bool,
) -> Result<bool> {
    let (s0, s1) = match axis {
        Axis::LeftRight => (bx.left(), bx.right()),
        Axis::TopBottom => (bx.top(), bx.bottom()),
    };
    let start = boundary_cell_walk(view, s0.a, s0.b)?;
    let target = boundary_cell_walk(view, s1.a, s1.b)?;
    if certify {
        if let Some(&c) = start.iter().chain(&target).find(|&&c| !view.certified(c)) {
            return Err(Error::Padding(format!("boundary cell {c} is not certified")));
        }
    }
    let mut is_target = vec![false; view.len()];
    for &c in &target {
        is_target[c] = true;
    }
    let mut seen = vec![false; view.len()];
    let mut queue = VecDeque::new();
    for &c in &start {
        if view.color(c) == color && !seen[c] {
            seen[c] = true;
            queue.push_back(c);
        }
    }
    while let Some(u) = queue.pop_front() {
        if is_target[u] {
            return Ok(true);
        }
        if certify && !view.certified(u) {
            return Err(Error::Padding(format!("cell {u} meets the box but is not certified")));
        }
        for nb in view.neighbors(u) {
            let v = nb.site;
            if seen[v] || !view.alive(v) || view.color(v) != color {
                continue;
            }
            if view.edge_geometry(u, nb).meets_rect(bx) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(false)
}

/// The Voronoi crossing functional: +1 if `W_L` is crossed from left to
/// right by black cells, -1 otherwise.
pub fn voronoi_crossing_sign<V: CellView + ?Sized>(view: &V, l: f64, certify: bool) -> Result<f64> {
    let c = voronoi_crossing(view, &Rect::square(l), Sign::Plus, Axis::LeftRight, certify)?;
    Ok(if c { 1.0 } else { -1.0 })
}

/// Indices of the cells meeting the box, found by flooding from the walk
/// along its left side through edges that meet the box.
pub fn cells_meeting_box<V: CellView + ?Sized>(view: &V, bx: &Rect) -> Result<Vec<usize>> {
    let s = bx.left();
    let start = boundary_cell_walk(view, s.a, s.b)?;
    let mut seen = vec![false; view.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for c in start {
        if !seen[c] {
            seen[c] = true;
            queue.push_back(c);
        }
    }
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        out.push(u);
        for nb in view.neighbors(u) {
            if !seen[nb.site] && view.alive(nb.site) && view.edge_geometry(u, nb).meets_rect(bx) {
                seen[nb.site] = true;
                queue.push_back(nb.site);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use crate::model::{sample_poisson, voronoi_padding, MarkedPoint};
    use crate::SeedSpec;
    use robust::{incircle, orient2d, Coord};

    fn coord(p: Point2) -> Coord<f64> {
        Coord { x: p.x, y: p.y }
    }

    fn sample(l: f64, seed: &SeedSpec) -> PointConfiguration {
        sample_poisson(1.0, &Region::square(l + voronoi_padding(1.0)), true, seed).unwrap()
    }

    #[test]
    fn three_points_one_triangle() {
        let locs = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let cfg = PointConfiguration::from_locations(&locs, Region::square(2.0));
        let t = VoronoiTessellation::build(&cfg).unwrap();
        assert_eq!(t.faces.len(), 1);
        assert!(t.nbrs.iter().all(|n| n.len() == 2));
        assert!((t.faces[0].cc.x - 0.5).abs() < 1e-12 && (t.faces[0].cc.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn convex_quadrilateral_uses_delaunay_diagonal() {
        // the short diagonal (0,-1)-(0,1) passes the empty circle test
        let locs = [Point2::new(-2.0, 0.0), Point2::new(0.0, -1.0), Point2::new(2.0, 0.0), Point2::new(0.0, 1.0)];
        let cfg = PointConfiguration::from_locations(&locs, Region::square(3.0));
        let t = VoronoiTessellation::build(&cfg).unwrap();
        assert_eq!(t.faces.len(), 2);
        assert!(t.nbrs[1].iter().any(|n| n.site == 3));
        assert!(!t.nbrs[0].iter().any(|n| n.site == 2));
    }

    #[test]
    fn collinear_and_tiny_inputs() {
        let locs = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(3.0, 0.0)];
        let cfg = PointConfiguration::from_locations(&locs, Region::square(4.0));
        let t = VoronoiTessellation::build(&cfg).unwrap();
        assert!(t.faces.is_empty());
        assert_eq!(t.nbrs[1].len(), 2);
        let walk = boundary_cell_walk(&t, Point2::new(-1.0, 1.0), Point2::new(4.0, 1.0)).unwrap();
        assert_eq!(walk, vec![0, 1, 2]);
        let one = PointConfiguration::from_locations(&locs[..1], Region::square(4.0));
        let t = VoronoiTessellation::build(&one).unwrap();
        assert_eq!(boundary_cell_walk(&t, Point2::new(-1.0, 1.0), Point2::new(4.0, 1.0)).unwrap(), vec![0]);
    }

    #[test]
    fn empty_circle_holds_against_brute_force() {
        let cfg = sample_poisson(1.0, &Region::square(15.8), false, &SeedSpec::new(1, "dt")).unwrap();
        assert!(cfg.len() > 900);
        let t = VoronoiTessellation::build(&cfg).unwrap();
        for f in &t.faces {
            let [a, b, c] = f.verts.map(|v| coord(t.sites[v]));
            let o = orient2d(a, b, c);
            assert!(o != 0.0);
            for (i, p) in t.sites.iter().enumerate() {
                if f.has(i) {
                    continue;
                }
                let s = incircle(a, b, c, coord(*p));
                assert!(s * o.signum() <= 0.0, "site {i} inside circumcircle");
            }
        }
    }

    #[test]
    fn walk_matches_dense_nearest_site_sampling() {
        let cfg = sample(4.0, &SeedSpec::new(2, "walk"));
        let t = VoronoiTessellation::build(&cfg).unwrap();
        let (a, b) = (Point2::new(-4.0, -4.0), Point2::new(4.0, 3.0));
        let walk = boundary_cell_walk(&t, a, b).unwrap();
        let mut dense = Vec::new();
        for k in 0..=10_000 {
            let s = k as f64 / 10_000.0;
            let p = Point2::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
            let c = t.nearest(p).unwrap();
            if dense.last() != Some(&c) {
                dense.push(c);
            }
        }
        assert_eq!(walk, dense);
    }

    #[test]
    fn all_black_crosses_and_swap_symmetry() {
        let cfg = sample(4.0, &SeedSpec::new(3, "black"));
        let black = cfg.with_marks(&vec![Sign::Plus; cfg.len()]);
        let t = VoronoiTessellation::build(&black).unwrap();
        let bx = Rect::square(4.0);
        assert!(voronoi_crossing(&t, &bx, Sign::Plus, Axis::LeftRight, true).unwrap());
        assert!(!voronoi_crossing(&t, &bx, Sign::Minus, Axis::LeftRight, true).unwrap());
        for r in 0..20 {
            let cfg = sample(4.0, &SeedSpec::new(3, "swap").replica(r));
            let swapped: Vec<Sign> = cfg.signs().iter().map(|s| s.flip()).collect();
            let t = VoronoiTessellation::build(&cfg).unwrap();
            let ts = VoronoiTessellation::build(&cfg.with_marks(&swapped)).unwrap();
            let a = voronoi_crossing(&t, &bx, Sign::Plus, Axis::LeftRight, true).unwrap();
            let b = voronoi_crossing(&ts, &bx, Sign::Minus, Axis::LeftRight, true).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn black_left_right_excludes_white_top_bottom() {
        let bx = Rect::square(4.0);
        for r in 0..50 {
            let cfg = sample(4.0, &SeedSpec::new(4, "dual").replica(r));
            let t = VoronoiTessellation::build(&cfg).unwrap();
            let a = voronoi_crossing(&t, &bx, Sign::Plus, Axis::LeftRight, true).unwrap();
            let b = voronoi_crossing(&t, &bx, Sign::Minus, Axis::TopBottom, true).unwrap();
            assert!(a ^ b);
        }
    }

    #[test]
    fn one_black_cell_far_away_does_not_cross() {
        let cfg = sample(4.0, &SeedSpec::new(5, "one"));
        let mut marks = vec![Sign::Minus; cfg.len()];
        let far = cfg.points.iter().position(|p| p.pos.x > 10.0).unwrap();
        marks[far] = Sign::Plus;
        let t = VoronoiTessellation::build(&cfg.with_marks(&marks)).unwrap();
        assert!(!voronoi_crossing(&t, &Rect::square(4.0), Sign::Plus, Axis::LeftRight, true).unwrap());
    }

    #[test]
    fn thin_padding_is_reported() {
        let cfg = sample_poisson(1.0, &Region::square(4.5), true, &SeedSpec::new(6, "thin")).unwrap();
        let t = VoronoiTessellation::build(&cfg).unwrap();
        let r = voronoi_crossing(&t, &Rect::square(4.0), Sign::Plus, Axis::LeftRight, true);
        assert!(matches!(r, Err(Error::Padding(_))));
    }

    #[test]
    fn rays_point_away_from_the_hull() {
        // a triangle: every Voronoi edge is a ray leaving through the opposite side
        let locs = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(1.0, 2.0)];
        let cfg = PointConfiguration::new(
            locs.iter().map(|&p| MarkedPoint::new(p, Sign::Plus)).collect(),
            Region::square(3.0),
            true,
        );
        let t = VoronoiTessellation::build(&cfg).unwrap();
        let nb = *t.nbrs[0].iter().find(|n| n.site == 1).unwrap();
        match t.edge_geometry(0, &nb) {
            EdgeGeom::Ray { dir, .. } => assert!(dir.y < 0.0),
            g => panic!("expected a ray, got {g:?}"),
        }
    }
}
