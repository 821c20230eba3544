//! Uniform 3-D grids over `[-Lx, Lx] x [-Ly, Ly] x [-Lt, Lt]` for `n = 1`.
//!
//! Each axis has `N` cell-centred nodes `-L + (i + 1/2) h` with `h = 2L/N`.
//! Nodes `0` and `N - 1` form the boundary layer and hold zero; unknowns live
//! on the `(N - 2)^3` interior nodes.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_widths: [f64; 3],
    pub counts: [usize; 3],
}

impl Grid {
    pub fn new(half_widths: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        for k in 0..3 {
            if !(half_widths[k] > 0.0) || !half_widths[k].is_finite() {
                return Err(LabError::param(format!(
                    "grid half-width on axis {k} must be positive, got {}",
                    half_widths[k]
                )));
            }
            if counts[k] < 3 {
                return Err(LabError::param(format!(
                    "grid needs at least 3 nodes per axis, got {} on axis {k}",
                    counts[k]
                )));
            }
        }
        Ok(Self {
            half_widths,
            counts,
        })
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / self.counts[axis] as f64
    }

    /// Coordinate of node `i` (boundary nodes included) along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -self.half_widths[axis] + (i as f64 + 0.5) * self.spacing(axis)
    }

    pub fn interior_counts(&self) -> [usize; 3] {
        self.counts.map(|c| c - 2)
    }

    pub fn dim(&self) -> usize {
        self.interior_counts().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..3).map(|k| self.spacing(k)).product()
    }

    /// Volume covered by the interior cells.
    pub fn interior_volume(&self) -> f64 {
        self.dim() as f64 * self.cell_volume()
    }

    /// Unknown index of the full-grid node `(i, j, k)`, or `None` on the boundary.
    pub fn index(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let [nx, ny, nt] = self.counts;
        if i == 0 || j == 0 || k == 0 || i >= nx - 1 || j >= ny - 1 || k >= nt - 1 {
            return None;
        }
        let [_, my, mt] = self.interior_counts();
        Some(((i - 1) * my + (j - 1)) * mt + (k - 1))
    }

    /// Full-grid node `(i, j, k)` of an unknown.
    pub fn node(&self, idx: usize) -> (usize, usize, usize) {
        let [_, my, mt] = self.interior_counts();
        (idx / (my * mt) + 1, (idx / mt) % my + 1, idx % mt + 1)
    }

    /// `(x, y, tau)` of an unknown.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.node(idx);
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> GridField {
        GridField {
            grid: *self,
            values: (0..self.dim()).map(|i| f(self.point(i))).collect(),
        }
    }
}

/// Values on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.dim()],
            grid,
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| {
            if v.abs() > m || v.is_nan() {
                v.abs()
            } else {
                m
            }
        })
    }

    /// `(sum |v|^q dV)^(1/q)` with the cell volume as weight.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(q)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / q)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
