//! Uniform time grids and sampled paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when snapping a time onto a grid node.
const SNAP_TOL: f64 = 1e-9;

/// Uniform grid `t0 + k*dt`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::param("t0", "must be finite"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive and finite, got {dt}")));
        }
        if n == 0 {
            return Err(Error::param("n", "grid needs at least one step"));
        }
        Ok(Self { t0, dt, n })
    }

    /// Grid with `n` steps covering `[t0, t1]`.
    pub fn spanning(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::param("t1", format!("must exceed t0 = {t0}, got {t1}")));
        }
        Self::new(t0, (t1 - t0) / n as f64, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; there are `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |k| self.time(k))
    }

    /// Index of the node at time `t`, or an error if `t` is not (numerically) a node.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let off_grid = || Error::OffGrid { time: t, t0: self.t0, dt: self.dt };
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        let tol = SNAP_TOL * (1.0 + x.abs());
        if (x - k).abs() > tol || k < 0.0 || k > self.n as f64 {
            return Err(off_grid());
        }
        Ok(k as usize)
    }

    /// Node indices whose times lie in `[a, b]` (inclusive, with snapping tolerance).
    pub fn index_range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let xa = (a - self.t0) / self.dt;
        let xb = (b - self.t0) / self.dt;
        let lo = (xa - SNAP_TOL * (1.0 + xa.abs())).ceil();
        let hi = (xb + SNAP_TOL * (1.0 + xb.abs())).floor();
        let lo = lo.max(0.0);
        let hi = hi.min(self.n as f64);
        (lo <= hi).then_some((lo as usize, hi as usize))
    }

    pub(crate) fn same_as(&self, other: &TimeGrid) -> bool {
        self.n == other.n
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= 1e-12 * (1.0 + self.dt * self.n as f64)
    }
}

/// Values sampled on every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {} at node {k}", values[k])));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f` on every node.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }

    /// Max of `|value|` over all nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    /// Restriction to the nodes `lo..=hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi > self.grid.n {
            return Err(Error::Domain(format!("bad slice {lo}..={hi} of {} nodes", self.grid.len())));
        }
        let grid = TimeGrid::new(self.grid.time(lo), self.grid.dt, hi - lo)?;
        Ok(Self { grid, values: self.values[lo..=hi].to_vec() })
    }
}

impl AsRef<Path> for Path {
    fn as_ref(&self) -> &Path {
        self
    }
}
