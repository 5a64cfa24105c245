//! Exact occupied clusters of unit disks restricted to a union of rectangles.
//!
//! The region is covered by rectangular pieces. A node is a pair (disk, piece)
//! with nonempty intersection. Two nodes in the same piece are joined when the
//! lens of their disks meets the piece; two nodes of the same disk are joined
//! when the disk meets the intersection of their pieces. Both tests are exact
//! for convex sets, so the components are exactly the connected components of
//! the occupied set inside the region.

use crate::geometry::{lens_meets_rect, Point2, Rect, Segment};
use crate::unionfind::WeightedUnionFind;

/// Rectangular cover of a region together with labelled boundary segments.
#[derive(Debug, Clone)]
pub struct PieceCover {
    pub pieces: Vec<Rect>,
    /// Pieces arranged in a ring, used to detect clusters winding around it.
    pub cyclic: bool,
    /// `groups[g]` lists the segments of boundary group `g`.
    pub groups: Vec<Vec<Segment>>,
}

/// One occupied cluster.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// Bit `g` is set when the cluster touches boundary group `g`.
    pub touches: u32,
    /// The cluster contains a loop around the ring of pieces.
    pub wraps: bool,
    /// Indices of the disks in the cluster, sorted.
    pub disks: Vec<usize>,
}

impl Cluster {
    pub fn touches_all(&self, mask: u32) -> bool {
        self.touches & mask == mask
    }
}

/// Calls `f(i, j)` for every pair `i < j` of points at distance at most `d`.
pub fn for_each_close_pair(pts: &[Point2], d: f64, mut f: impl FnMut(usize, usize)) {
    if pts.len() < 2 {
        return;
    }
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let nx = (((x1 - x0) / d).floor() as usize + 1).min(1 << 12);
    let ny = (((y1 - y0) / d).floor() as usize + 1).min(1 << 12);
    let cell = |p: &Point2| {
        let cx = (((p.x - x0) / d) as usize).min(nx - 1);
        let cy = (((p.y - y0) / d) as usize).min(ny - 1);
        cy * nx + cx
    };
    // counting sort of points into cells
    let mut start = vec![0usize; nx * ny + 1];
    let cells: Vec<usize> = pts.iter().map(cell).collect();
    for &c in &cells {
        start[c + 1] += 1;
    }
    for i in 0..nx * ny {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; pts.len()];
    for (i, &c) in cells.iter().enumerate() {
        order[fill[c]] = i;
        fill[c] += 1;
    }
    let d2 = d * d;
    for (i, &c) in cells.iter().enumerate() {
        let (cx, cy) = (c % nx, c / nx);
        for yy in cy.saturating_sub(1)..=(cy + 1).min(ny - 1) {
            for xx in cx.saturating_sub(1)..=(cx + 1).min(nx - 1) {
                let k = yy * nx + xx;
                for &j in &order[start[k]..start[k + 1]] {
                    if j > i && pts[i].dist2(pts[j]) <= d2 {
                        f(i, j);
                    }
                }
            }
        }
    }
}

fn ring_step(k: usize, l: usize, n: usize, cyclic: bool) -> i64 {
    if !cyclic {
        return l as i64 - k as i64;
    }
    if (k + 1) % n == l {
        1
    } else if (l + 1) % n == k {
        -1
    } else {
        0
    }
}

/// Occupied clusters of the unit disks centered at `pts`, restricted to the
/// region covered by `cover`.
pub fn occupied_clusters(pts: &[Point2], cover: &PieceCover) -> Vec<Cluster> {
    let np = cover.pieces.len();
    assert!(np <= 8, "at most 8 pieces");
    const NONE: u32 = u32::MAX;
    let mut node_of = vec![[NONE; 8]; pts.len()];
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    for (i, &c) in pts.iter().enumerate() {
        for (k, piece) in cover.pieces.iter().enumerate() {
            if piece.dist2(c) <= 1.0 {
                node_of[i][k] = nodes.len() as u32;
                nodes.push((i, k));
            }
        }
    }
    let mut uf = WeightedUnionFind::new(nodes.len());
    // same disk, different pieces
    for (i, &c) in pts.iter().enumerate() {
        for k in 0..np {
            if node_of[i][k] == NONE {
                continue;
            }
            for l in k + 1..np {
                if node_of[i][l] == NONE {
                    continue;
                }
                let inter = cover.pieces[k].intersect(&cover.pieces[l]);
                if !inter.is_empty() && inter.dist2(c) <= 1.0 {
                    let step = ring_step(k, l, np, cover.cyclic);
                    uf.union(node_of[i][k] as usize, node_of[i][l] as usize, step);
                }
            }
        }
    }
    // different disks, same piece
    for_each_close_pair(pts, 2.0, |i, j| {
        for k in 0..np {
            let (a, b) = (node_of[i][k], node_of[j][k]);
            if a != NONE && b != NONE && lens_meets_rect(pts[i], pts[j], 1.0, &cover.pieces[k]) {
                uf.union(a as usize, b as usize, 0);
            }
        }
    });
    // boundary touches, with group segments clipped to each piece
    let clipped: Vec<Vec<Vec<Segment>>> = cover
        .pieces
        .iter()
        .map(|p| {
            cover
                .groups
                .iter()
                .map(|g| g.iter().filter_map(|s| s.clip_axis_aligned(p)).collect())
                .collect()
        })
        .collect();
    let mut root_index = vec![usize::MAX; nodes.len()];
    let mut clusters: Vec<Cluster> = Vec::new();
    for (n, &(i, k)) in nodes.iter().enumerate() {
        let (root, _) = uf.find(n);
        if root_index[root] == usize::MAX {
            root_index[root] = clusters.len();
            clusters.push(Cluster { touches: 0, wraps: uf.wraps(root), disks: Vec::new() });
        }
        let cl = &mut clusters[root_index[root]];
        cl.disks.push(i);
        for (g, segs) in clipped[k].iter().enumerate() {
            if cl.touches & (1 << g) == 0 && segs.iter().any(|s| s.dist2(pts[i]) <= 1.0) {
                cl.touches |= 1 << g;
            }
        }
    }
    for cl in &mut clusters {
        cl.disks.sort_unstable();
        cl.disks.dedup();
    }
    clusters
}

/// Boundary groups of a rectangle: left, right, bottom, top.
pub fn rect_cover(r: &Rect) -> PieceCover {
    let s = r.sides();
    PieceCover { pieces: vec![*r], cyclic: false, groups: s.iter().map(|x| vec![*x]).collect() }
}

pub const LEFT: u32 = 1;
pub const RIGHT: u32 = 2;
pub const BOTTOM: u32 = 4;
pub const TOP: u32 = 8;
