//! Diagnostic path norms. Every supremum runs over grid nodes only.

use crate::error::{Error, Result};
use crate::grid::Path;

fn node_range(path: &Path, a: f64, b: f64, what: &str) -> Result<(usize, usize)> {
    if !(a < b) {
        return Err(Error::Domain(format!("{what} needs a < b, got [{a}, {b}]")));
    }
    let grid = path.grid();
    let lo = grid.index_of(a).map_err(|_| Error::Domain(format!("{what}: {a} is not a node of the data")))?;
    let hi = grid.index_of(b).map_err(|_| Error::Domain(format!("{what}: {b} is not a node of the data")))?;
    Ok((lo, hi))
}

/// Long-term norm `sup_{r ∈ [U,T]} |B_r − B_T| / (1 + T − r)^{1/2+δ}`.
pub fn norm_l(brownian: &Path, u: f64, t: f64, delta: f64) -> Result<f64> {
    let (lo, hi) = node_range(brownian, u, t, "norm L")?;
    let v = brownian.values();
    let dt = brownian.grid().dt();
    let e = 0.5 + delta;
    Ok((lo..=hi)
        .map(|k| (v[k] - v[hi]).abs() / (1.0 + (hi - k) as f64 * dt).powf(e))
        .fold(0.0, f64::max))
}

/// Short-term norm `sup_{r ∈ [T−1,T)} |B_r − B_T| / (T − r)^{1/2−δ}`.
pub fn norm_s(brownian: &Path, t: f64, delta: f64) -> Result<f64> {
    let (lo, hi) = node_range(brownian, t - 1.0, t, "norm S")?;
    let v = brownian.values();
    let dt = brownian.grid().dt();
    let e = 0.5 - delta;
    Ok((lo..hi)
        .map(|k| (v[k] - v[hi]).abs() / ((hi - k) as f64 * dt).powf(e))
        .fold(0.0, f64::max))
}

/// Exact Hölder seminorm `sup_{i<j} |x_j − x_i| / ((j−i) dt)^a` by pair scan.
pub fn holder_seminorm(values: &[f64], dt: f64, a: f64) -> f64 {
    let m = values.len();
    let mut best = 0.0_f64;
    for gap in 1..m {
        let w = (gap as f64 * dt).powf(-a);
        for i in 0..m - gap {
            best = best.max((values[i + gap] - values[i]).abs() * w);
        }
    }
    best
}

/// Upper bound on `holder_seminorm` in `O(m log m)` by dyadic chaining.
///
/// Any node pair `i < j` with `2^L <= j − i < 2^{L+1}` splits into aligned
/// dyadic blocks, at most two per level `l <= L`, so
/// `|x_j − x_i| <= 2 Σ_{l<=L} D_l` with `D_l` the largest block increment.
pub fn holder_chaining_bound(values: &[f64], dt: f64, a: f64) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let steps = m - 1;
    let mut bound = 0.0_f64;
    let mut partial = 0.0;
    let mut len = 1;
    while len <= steps {
        let d = (0..=steps - len)
            .step_by(len)
            .map(|k| (values[k + len] - values[k]).abs())
            .fold(0.0, f64::max);
        partial += d;
        bound = bound.max(2.0 * partial / (len as f64 * dt).powf(a));
        len *= 2;
    }
    bound
}

/// Whether `holder_seminorm(values, dt, a) > threshold`, screening with the
/// chaining bound before falling back to the exact scan.
pub fn holder_exceeds(values: &[f64], dt: f64, a: f64, threshold: f64) -> bool {
    if holder_chaining_bound(values, dt, a) <= threshold {
        return false;
    }
    let m = values.len();
    for gap in 1..m {
        let cut = threshold * (gap as f64 * dt).powf(a);
        if (0..m - gap).any(|i| (values[i + gap] - values[i]).abs() > cut) {
            return true;
        }
    }
    false
}

/// Scale-normalized Hölder norm
/// `|b−a|^{−δ} sup_{a<=u<v<=b} |B_v − B_u| / |v−u|^{1/2−δ}`.
pub fn norm_m(brownian: &Path, a: f64, b: f64, delta: f64) -> Result<f64> {
    let (lo, hi) = node_range(brownian, a, b, "norm M")?;
    let dt = brownian.grid().dt();
    let sup = holder_seminorm(&brownian.values()[lo..=hi], dt, 0.5 - delta);
    Ok((b - a).powf(-delta) * sup)
}
