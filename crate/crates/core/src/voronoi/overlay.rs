//! Local edits of a tessellation: recoloring sites and removing one site.
//!
//! Removing an interior site only changes the cells of its Delaunay
//! neighbors. The hole left by the site is the star-shaped polygon of those
//! neighbors, and its new triangles are the triangles of polygon vertices that
//! lie inside it and whose circumcircle holds no other polygon vertex. Hull
//! sites and degenerate holes fall back to a rebuild.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use super::{CellView, Face, Nbr, VoronoiTessellation};
use crate::error::{invalid, Result};
use crate::geometry::{Point2, Rect};
use crate::model::Sign;

fn coord(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// A tessellation seen through recolorings and at most one local removal.
#[derive(Debug, Clone)]
pub struct Overlay<'a> {
    base: &'a VoronoiTessellation,
    removed: Option<usize>,
    recolored: Vec<(usize, Sign)>,
    nbrs: HashMap<usize, Vec<Nbr>>,
    faces: Vec<Face>,
}

impl<'a> Overlay<'a> {
    pub fn new(base: &'a VoronoiTessellation) -> Self {
        Overlay { base, removed: None, recolored: Vec::new(), nbrs: HashMap::new(), faces: Vec::new() }
    }

    pub fn recolor(&mut self, i: usize, color: Sign) {
        match self.recolored.iter_mut().find(|(j, _)| *j == i) {
            Some(e) => e.1 = color,
            None => self.recolored.push((i, color)),
        }
    }

    /// Removes interior site `s` locally; `None` if it is on the hull or the
    /// hole is degenerate.
    fn remove_local(base: &'a VoronoiTessellation, s: usize) -> Option<Self> {
        if base.hull[s] || !base.alive[s] {
            return None;
        }
        let c = base.sites[s];
        let mut link: Vec<usize> = base.nbrs[s].iter().map(|n| n.site).collect();
        link.sort_by(|&a, &b| {
            let (pa, pb) = (base.sites[a], base.sites[b]);
            (pa.y - c.y).atan2(pa.x - c.x).total_cmp(&(pb.y - c.y).atan2(pb.x - c.x))
        });
        let m = link.len();
        if m < 3 {
            return None;
        }
        let poly: Vec<Point2> = link.iter().map(|&v| base.sites[v]).collect();
        let mut tris = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let (a, b, d) = (coord(poly[i]), coord(poly[j]), coord(poly[k]));
                    let o = orient2d(a, b, d);
                    if o == 0.0 {
                        continue;
                    }
                    let (j2, k2) = if o > 0.0 { (j, k) } else { (k, j) };
                    let (b, d) = (coord(poly[j2]), coord(poly[k2]));
                    let empty = (0..m).all(|q| q == i || q == j || q == k || incircle(a, b, d, coord(poly[q])) < 0.0);
                    if !empty {
                        continue;
                    }
                    let g = Point2::new(
                        (poly[i].x + poly[j].x + poly[k].x) / 3.0,
                        (poly[i].y + poly[j].y + poly[k].y) / 3.0,
                    );
                    if inside_polygon(&poly, g) {
                        tris.push([link[i], link[j2], link[k2]]);
                    }
                }
            }
        }
        if tris.len() != m - 2 {
            return None;
        }
        let nf = base.faces.len() as u32;
        let faces: Vec<Face> =
            tris.iter().map(|&t| Face::from_sites(t, t.map(|v| base.sites[v]))).collect();
        let mut nbrs = HashMap::new();
        for &v in &link {
            // faces around v: the old ones not at s, and the new ones
            let mut around: Vec<(u32, Face)> = Vec::new();
            for nb in &base.nbrs[v] {
                for f in [nb.left, nb.right].into_iter().flatten() {
                    let fc = base.faces[f as usize];
                    if !fc.has(s) && !around.iter().any(|(g, _)| *g == f) {
                        around.push((f, fc));
                    }
                }
            }
            for (k, fc) in faces.iter().enumerate() {
                if fc.has(v) {
                    around.push((nf + k as u32, *fc));
                }
            }
            let mut others: Vec<usize> = base.nbrs[v].iter().map(|n| n.site).filter(|&w| w != s).collect();
            for t in &tris {
                if t.contains(&v) {
                    for &w in t {
                        if w != v && !others.contains(&w) {
                            others.push(w);
                        }
                    }
                }
            }
            let pv = coord(base.sites[v]);
            let list = others
                .into_iter()
                .map(|w| {
                    let pw = coord(base.sites[w]);
                    let (mut left, mut right) = (None, None);
                    for (id, fc) in &around {
                        if !fc.has(w) {
                            continue;
                        }
                        let x = fc.third(v, w);
                        if orient2d(pv, pw, coord(base.sites[x])) > 0.0 {
                            left = Some(*id);
                        } else {
                            right = Some(*id);
                        }
                    }
                    Nbr { site: w, left, right }
                })
                .collect();
            nbrs.insert(v, list);
        }
        Some(Overlay { base, removed: Some(s), recolored: Vec::new(), nbrs, faces })
    }
}

fn inside_polygon(poly: &[Point2], p: Point2) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

impl CellView for Overlay<'_> {
    fn len(&self) -> usize {
        self.base.len()
    }
    fn alive(&self, i: usize) -> bool {
        self.removed != Some(i) && self.base.alive[i]
    }
    fn site(&self, i: usize) -> Point2 {
        self.base.sites[i]
    }
    fn color(&self, i: usize) -> Sign {
        match self.recolored.iter().find(|(j, _)| *j == i) {
            Some(&(_, c)) => c,
            None => self.base.colors[i],
        }
    }
    fn neighbors(&self, i: usize) -> &[Nbr] {
        match self.nbrs.get(&i) {
            Some(v) => v,
            None => &self.base.nbrs[i],
        }
    }
    fn face(&self, f: u32) -> &Face {
        let nf = self.base.faces.len();
        if (f as usize) < nf {
            &self.base.faces[f as usize]
        } else {
            &self.faces[f as usize - nf]
        }
    }
    fn on_hull(&self, i: usize) -> bool {
        self.base.hull[i]
    }
    fn window(&self) -> Rect {
        self.base.window
    }
}

/// A tessellation after edits: a local overlay when possible, otherwise a
/// rebuilt complex over the same index space.
#[derive(Debug, Clone)]
pub enum Modified<'a> {
    Local(Overlay<'a>),
    Rebuilt(VoronoiTessellation),
}

impl<'a> Modified<'a> {
    /// The tessellation without site `s`.
    pub fn remove(base: &'a VoronoiTessellation, s: usize) -> Result<Self> {
        if s >= base.len() || !base.alive[s] {
            return invalid(format!("no alive site with index {s}"));
        }
        if let Some(o) = Overlay::remove_local(base, s) {
            return Ok(Modified::Local(o));
        }
        let mut alive = base.alive.clone();
        alive[s] = false;
        let t = VoronoiTessellation::build_subset(&base.sites, &base.colors, &alive, base.window)?;
        Ok(Modified::Rebuilt(t))
    }

    pub fn recolor(&mut self, i: usize, color: Sign) {
        match self {
            Modified::Local(o) => o.recolor(i, color),
            Modified::Rebuilt(t) => t.colors[i] = color,
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, Modified::Local(_))
    }

    fn view(&self) -> &dyn CellView {
        match self {
            Modified::Local(o) => o,
            Modified::Rebuilt(t) => t,
        }
    }
}

impl CellView for Modified<'_> {
    fn len(&self) -> usize {
        self.view().len()
    }
    fn alive(&self, i: usize) -> bool {
        self.view().alive(i)
    }
    fn site(&self, i: usize) -> Point2 {
        self.view().site(i)
    }
    fn color(&self, i: usize) -> Sign {
        self.view().color(i)
    }
    fn neighbors(&self, i: usize) -> &[Nbr] {
        self.view().neighbors(i)
    }
    fn face(&self, f: u32) -> &Face {
        self.view().face(f)
    }
    fn on_hull(&self, i: usize) -> bool {
        self.view().on_hull(i)
    }
    fn window(&self) -> Rect {
        self.view().window()
    }
}
