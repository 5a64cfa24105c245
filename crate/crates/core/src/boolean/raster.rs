//! Raster approximation of the occupied set.
//!
//! A cell is occupied when its center lies in a closed unit disk. Occupied
//! cells are joined through their 8 neighbors and vacant cells through their
//! 4 neighbors, which makes the two colors exactly dual on the grid.

use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::geometry::{Point2, Rect};
use crate::model::PointConfiguration;

#[derive(Debug, Clone)]
pub struct OccupancyRaster {
    pub rect: Rect,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub occupied: Vec<bool>,
}

/// Component labels of a raster restricted to a domain mask.
#[derive(Debug, Clone)]
pub struct Labels {
    /// Label of each cell, `usize::MAX` outside the domain.
    pub label: Vec<usize>,
    pub count: usize,
    /// Color of each component.
    pub occupied: Vec<bool>,
}

const MAX_CELLS: usize = 50_000_000;

impl OccupancyRaster {
    pub fn new(cfg: &PointConfiguration, rect: &Rect, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("raster resolution must be positive, got {h}"));
        }
        let nx = (rect.width() / h).ceil().max(1.0) as usize;
        let ny = (rect.height() / h).ceil().max(1.0) as usize;
        if nx.saturating_mul(ny) > MAX_CELLS {
            return invalid("raster too fine for the region");
        }
        let mut occupied = vec![false; nx * ny];
        for p in &cfg.points {
            let c = p.pos;
            let i0 = (((c.x - 1.0 - rect.x0) / h).floor().max(0.0)) as usize;
            let j0 = (((c.y - 1.0 - rect.y0) / h).floor().max(0.0)) as usize;
            let i1 = (((c.x + 1.0 - rect.x0) / h).ceil().max(0.0) as usize).min(nx);
            let j1 = (((c.y + 1.0 - rect.y0) / h).ceil().max(0.0) as usize).min(ny);
            for j in j0..j1 {
                let y = rect.y0 + (j as f64 + 0.5) * h;
                let dy = y - c.y;
                for i in i0..i1 {
                    let x = rect.x0 + (i as f64 + 0.5) * h;
                    let dx = x - c.x;
                    if dx * dx + dy * dy <= 1.0 {
                        occupied[j * nx + i] = true;
                    }
                }
            }
        }
        Ok(OccupancyRaster { rect: *rect, h, nx, ny, occupied })
    }

    pub fn center(&self, i: usize, j: usize) -> Point2 {
        self.center_signed(i as i64, j as i64)
    }

    /// Center of a cell, also for indices outside the raster.
    pub fn center_signed(&self, i: i64, j: i64) -> Point2 {
        Point2::new(self.rect.x0 + (i as f64 + 0.5) * self.h, self.rect.y0 + (j as f64 + 0.5) * self.h)
    }

    /// Labels the components of both colors within `domain`.
    pub fn label(&self, domain: &[bool]) -> Labels {
        let (nx, ny) = (self.nx, self.ny);
        let mut label = vec![usize::MAX; nx * ny];
        let mut colors = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..nx * ny {
            if !domain[start] || label[start] != usize::MAX {
                continue;
            }
            let id = colors.len();
            let col = self.occupied[start];
            colors.push(col);
            label[start] = id;
            queue.push_back(start);
            while let Some(k) = queue.pop_front() {
                let (i, j) = ((k % nx) as i64, (k / nx) as i64);
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if (di == 0 && dj == 0) || (!col && di != 0 && dj != 0) {
                            continue;
                        }
                        let (ii, jj) = (i + di, j + dj);
                        if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                            continue;
                        }
                        let q = jj as usize * nx + ii as usize;
                        if domain[q] && label[q] == usize::MAX && self.occupied[q] == col {
                            label[q] = id;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        Labels { label, count: colors.len(), occupied: colors }
    }

    /// Whether components of the given color join the two opposite sides.
    fn crosses(&self, occupied: bool, left_right: bool) -> bool {
        let domain = vec![true; self.nx * self.ny];
        let labels = self.label(&domain);
        let (nx, ny) = (self.nx, self.ny);
        let mut start = vec![false; labels.count];
        if left_right {
            for j in 0..ny {
                start[labels.label[j * nx]] = true;
            }
            (0..ny).any(|j| {
                let l = labels.label[j * nx + nx - 1];
                start[l] && labels.occupied[l] == occupied
            })
        } else {
            for i in 0..nx {
                start[labels.label[i]] = true;
            }
            (0..nx).any(|i| {
                let l = labels.label[(ny - 1) * nx + i];
                start[l] && labels.occupied[l] == occupied
            })
        }
    }

    pub fn occupied_left_right(&self) -> bool {
        self.crosses(true, true)
    }

    pub fn vacant_top_bottom(&self) -> bool {
        self.crosses(false, false)
    }
}

/// Whether the vacant raster cells of `bx` connect its top and bottom sides.
pub fn vacant_crossing_raster(cfg: &PointConfiguration, bx: &Rect, h: f64) -> Result<bool> {
    Ok(OccupancyRaster::new(cfg, bx, h)?.vacant_top_bottom())
}
