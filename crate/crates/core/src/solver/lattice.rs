use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::qtensor::QTensor;

/// Uniform box grid, `n` nodes per axis including both boundary faces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl Grid3 {
    pub fn new(nx: usize, ny: usize, nz: usize, hx: f64, hy: f64, hz: f64) -> Result<Self, SolverError> {
        for (axis, n) in [("x", nx), ("y", ny), ("z", nz)] {
            if n < 3 {
                return Err(SolverError::Grid(format!("{axis}: need at least 3 nodes for an interior, got {n}")));
            }
        }
        for (axis, h) in [("x", hx), ("y", hy), ("z", hz)] {
            if !(h.is_finite() && h > 0.0) {
                return Err(SolverError::Grid(format!("{axis}: spacing must be positive, got {h}")));
            }
        }
        Ok(Grid3 { nx, ny, nz, hx, hy, hz })
    }

    pub fn cube(n: usize, h: f64) -> Result<Self, SolverError> {
        Self::new(n, n, n, h, h, h)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in one `x = const` plane.
    pub fn plane_len(&self) -> usize {
        self.ny * self.nz
    }

    /// `z` runs fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.nz + k
    }

    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.nz;
        let j = (idx / self.nz) % self.ny;
        let i = idx / (self.ny * self.nz);
        (i, j, k)
    }

    pub fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        i == 0 || j == 0 || k == 0 || i + 1 == self.nx || j + 1 == self.ny || k + 1 == self.nz
    }

    pub fn is_boundary_index(&self, idx: usize) -> bool {
        let (i, j, k) = self.coords(idx);
        self.is_boundary(i, j, k)
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [i as f64 * self.hx, j as f64 * self.hy, k as f64 * self.hz]
    }

    pub fn extent(&self) -> [f64; 3] {
        [(self.nx - 1) as f64 * self.hx, (self.ny - 1) as f64 * self.hy, (self.nz - 1) as f64 * self.hz]
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1] * e[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy * self.hz
    }

    pub fn h_min(&self) -> f64 {
        self.hx.min(self.hy).min(self.hz)
    }

    pub fn interior_len(&self) -> usize {
        (self.nx - 2) * (self.ny - 2) * (self.nz - 2)
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|idx| self.is_boundary_index(idx)).collect()
    }
}

/// A value stored at each grid node.
pub trait SiteValue:
    Copy + Send + Sync + Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + 'static
{
    const DIM: usize;
    fn zero() -> Self;
    fn norm2(&self) -> f64;
    fn component(&self, i: usize) -> f64;
    fn component_mut(&mut self, i: usize) -> &mut f64;

    fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    fn max_abs(&self) -> f64 {
        (0..Self::DIM).map(|i| self.component(i).abs()).fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        (0..Self::DIM).all(|i| self.component(i).is_finite())
    }
}

impl SiteValue for QTensor {
    const DIM: usize = 5;
    fn zero() -> Self {
        QTensor::ZERO
    }
    fn norm2(&self) -> f64 {
        QTensor::norm2(self)
    }
    fn component(&self, i: usize) -> f64 {
        self.0[i]
    }
    fn component_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl SiteValue for f64 {
    const DIM: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn norm2(&self) -> f64 {
        self * self
    }
    fn component(&self, _: usize) -> f64 {
        *self
    }
    fn component_mut(&mut self, _: usize) -> &mut f64 {
        self
    }
}

/// Node values on a grid, stored in grid index order.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<V> {
    pub grid: Grid3,
    pub values: Vec<V>,
}

pub type QField = Field<QTensor>;
pub type ScalarField = Field<f64>;

impl<V: SiteValue> Field<V> {
    pub fn constant(grid: Grid3, v: V) -> Self {
        Field { grid, values: vec![v; grid.len()] }
    }

    pub fn from_fn<F: FnMut(usize, usize, usize) -> V>(grid: Grid3, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                for k in 0..grid.nz {
                    values.push(f(i, j, k));
                }
            }
        }
        Field { grid, values }
    }

    pub fn from_values(grid: Grid3, values: Vec<V>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::Grid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::Grid(format!("non-finite value at node {:?}", grid.coords(idx))));
        }
        Ok(Field { grid, values })
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> V {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: V) {
        let idx = self.grid.index(i, j, k);
        self.values[idx] = v;
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        self.grid.boundary_mask()
    }

    /// Same boundary values, interior replaced by `v`.
    pub fn with_interior(&self, v: V) -> Self {
        let mut out = self.clone();
        for (idx, x) in out.values.iter_mut().enumerate() {
            if !self.grid.is_boundary_index(idx) {
                *x = v;
            }
        }
        out
    }

    /// Maximum norm over boundary nodes and the first node attaining it.
    pub fn max_boundary_norm(&self) -> (f64, usize) {
        self.max_norm_where(true)
    }

    pub fn max_interior_norm(&self) -> (f64, usize) {
        self.max_norm_where(false)
    }

    fn max_norm_where(&self, boundary: bool) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for (idx, v) in self.values.iter().enumerate() {
            if self.grid.is_boundary_index(idx) == boundary {
                let n = v.norm();
                if n > best.0 {
                    best = (n, idx);
                }
            }
        }
        best
    }

    pub fn map<W: SiteValue, F: Fn(&V) -> W>(&self, f: F) -> Field<W> {
        Field { grid: self.grid, values: self.values.iter().map(f).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
