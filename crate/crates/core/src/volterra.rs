//! Volterra representation of fBm increments.
//!
//! With `p = H − 1/2`, an increment splits into a Riemann–Liouville part over
//! the recent interval and a kernel-weighted integral over the past:
//!
//! ```text
//! W_t − W_s = ∫_s^t (t−r)^p dB_r + ∫_{-∞}^s G(t−s, s, r) dB_r = N + P,
//! G(u, s, r) = (s+u−r)^p − (s−r)^p.
//! ```
//!
//! The Brownian path is taken piecewise linear between grid nodes and every
//! integral is evaluated in integration-by-parts form,
//! `∫_a^b (c−r)^p dB_r = (c−a)^p (B_b − B_a) + p ∫_a^b (c−r)^{p−1} (B_r − B_b) dr`,
//! whose cell integrals are closed form. The kernel singularity at `r = c`
//! never gets sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::check_hurst;
use crate::grid::{Path, TimeGrid};
use crate::math::{convolve_prefix, pow0};

/// Default truncation of the two-sided past, in time units before the present.
pub const DEFAULT_HISTORY: f64 = 1000.0;

/// Above this many steps `riemann_liouville` switches from the direct
/// quadratic sum to an FFT convolution.
const DIRECT_MAX: usize = 2048;

fn is_markov(hurst: f64) -> bool {
    hurst == 0.5
}

/// `G(u, s, r) = (s+u−r)^{H−1/2} − (s−r)^{H−1/2}`.
pub fn kernel_g(u: f64, s: f64, r: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(r < s) {
        return Err(Error::Domain(format!("kernel G needs r < s, got r = {r}, s = {s}")));
    }
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("kernel G needs u >= 0, got {u}")));
    }
    if u == 0.0 || is_markov(hurst) {
        return Ok(0.0);
    }
    let p = hurst - 0.5;
    Ok((s + u - r).powf(p) - (s - r).powf(p))
}

/// `∫ (c − r)^p dB_r` over grid nodes `lo..=hi`, where `c_off = c − t_lo`
/// must be at least the span of the nodes.
fn power_integral(values: &[f64], lo: usize, hi: usize, dt: f64, c_off: f64, p: f64) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let b_end = values[hi];
    let mut acc = pow0(c_off, p) * (b_end - values[lo]);
    if p == 0.0 {
        return acc;
    }
    let q = p + 1.0;
    let mut yk = c_off;
    let mut yk_p = pow0(yk, p);
    let mut yk_q = pow0(yk, q);
    for k in lo..hi {
        let yk1 = (c_off - (k + 1 - lo) as f64 * dt).max(0.0);
        let yk1_p = pow0(yk1, p);
        let yk1_q = pow0(yk1, q);
        let slope = (values[k + 1] - values[k]) / dt;
        if yk1 > 0.0 {
            let beta = values[k] - b_end;
            acc += (beta + slope * yk) * (yk_p - yk1_p);
        }
        acc -= p * slope * (yk_q - yk1_q) / q;
        yk = yk1;
        yk_p = yk1_p;
        yk_q = yk1_q;
    }
    acc
}

/// `N_t = ∫_{t0}^t (t−r)^{H−1/2} dB_r` at every node, `t0` the grid start.
pub fn riemann_liouville(brownian: &Path, hurst: f64) -> Result<Path> {
    check_hurst(hurst)?;
    let v = brownian.values();
    let grid = *brownian.grid();
    if is_markov(hurst) {
        return Path::new(grid, v.iter().map(|x| x - v[0]).collect());
    }
    let p = hurst - 0.5;
    let n = grid.n();
    let dt = grid.dt();
    let out = if n <= DIRECT_MAX {
        (0..=n).map(|j| power_integral(v, 0, j, dt, j as f64 * dt, p)).collect()
    } else {
        // On a piecewise-linear path the integral is a discrete convolution
        // of the increments with the cell averages of the kernel.
        let scale = dt.powf(p) / (p + 1.0);
        let weights: Vec<f64> = (0..n)
            .map(|i| {
                let m = (i + 1) as f64;
                scale * (m.powf(p + 1.0) - (m - 1.0).powf(p + 1.0))
            })
            .collect();
        let inc: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
        let conv = convolve_prefix(&weights, &inc);
        std::iter::once(0.0).chain(conv).collect()
    };
    Path::new(grid, out)
}

/// `N_t` at the single node `end`, restarted at node `start`.
pub fn riemann_liouville_at(brownian: &Path, start: usize, end: usize, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if start > end || end > brownian.grid().n() {
        return Err(Error::Domain(format!("bad node range {start}..={end}")));
    }
    let v = brownian.values();
    if is_markov(hurst) {
        return Ok(v[end] - v[start]);
    }
    let dt = brownian.grid().dt();
    Ok(power_integral(v, start, end, dt, (end - start) as f64 * dt, hurst - 0.5))
}

/// `∫_{t_start}^{t_end} (t_end + u − r)^{H−1/2} dB_r`, the integral seen a
/// lag `u >= 0` past its endpoint.
pub fn riemann_liouville_lagged(brownian: &Path, start: usize, end: usize, u: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if start > end || end > brownian.grid().n() {
        return Err(Error::Domain(format!("bad node range {start}..={end}")));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("lag must be >= 0, got {u}")));
    }
    let v = brownian.values();
    if is_markov(hurst) {
        return Ok(v[end] - v[start]);
    }
    let dt = brownian.grid().dt();
    Ok(power_integral(v, start, end, dt, (end - start) as f64 * dt + u, hurst - 0.5))
}

/// Constant `C_H` in the long-term bound
/// `sup_{u<=1} sup_{v∈[s,t]} |∫_s^v (v+u−r)^{H−1/2} dB_r| / (1+v−s)^{H+δ}
///  <= C_H (1+t−s)^{2δ} M(s,t)` for piecewise-linear paths, with `M` as in
/// [`crate::norms::norm_m`].
///
/// The boundary term contributes 1 and the remainder `|H−1/2|/(H−δ)`, times
/// the Hölder seminorm of the interpolant, which is at most three times its
/// value over nodes.
pub fn long_term_bound_constant(hurst: f64, delta: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(delta > 0.0 && delta < hurst.min(0.5)) {
        return Err(Error::param("delta", format!("must lie in (0, min(H, 1/2)), got {delta}")));
    }
    Ok(3.0 * (1.0 + (hurst - 0.5).abs() / (hurst - delta)))
}

/// Past sampled on `(u, v)` as seen from the restart point `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PastWindow {
    u: f64,
    v: f64,
    s: f64,
}

impl PastWindow {
    /// `u == v` is accepted and denotes the empty window.
    pub fn new(u: f64, v: f64, s: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite() && s.is_finite()) {
            return Err(Error::param("window", "endpoints must be finite"));
        }
        if !(u <= v && v <= s) {
            return Err(Error::param("window", format!("need u <= v <= s, got ({u}, {v}, {s})")));
        }
        Ok(Self { u, v, s })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// `h ↦ P^{(u,v),s}_h = ∫_u^v G(h, s, r) dB_r` on the nodes of `horizon`.
///
/// `u` and `v` must be nodes of the Brownian grid; `s` and the horizon values
/// are free.
pub fn past_process(
    brownian: &Path,
    window: PastWindow,
    horizon: &TimeGrid,
    hurst: f64,
) -> Result<Path> {
    check_hurst(hurst)?;
    if horizon.t0() < 0.0 {
        return Err(Error::Domain(format!("horizon must start at h >= 0, got {}", horizon.t0())));
    }
    let grid = brownian.grid();
    let outside = || {
        Error::Domain(format!(
            "window ({}, {}) outside data [{}, {}]",
            window.u,
            window.v,
            grid.t0(),
            grid.t_end()
        ))
    };
    let lo = grid.index_of(window.u).map_err(|_| outside())?;
    let hi = grid.index_of(window.v).map_err(|_| outside())?;
    if lo == hi || is_markov(hurst) {
        return Ok(Path::zeros(*horizon));
    }
    let values = past_at(brownian, lo, hi, window.s, &horizon.times().collect::<Vec<_>>(), hurst);
    Path::new(*horizon, values)
}

/// `P^{(u,v),s}_h` at arbitrary `h >= 0`, with `u`, `v` given as node indices.
pub(crate) fn past_at(brownian: &Path, lo: usize, hi: usize, s: f64, hs: &[f64], hurst: f64) -> Vec<f64> {
    if lo == hi || is_markov(hurst) {
        return vec![0.0; hs.len()];
    }
    let p = hurst - 0.5;
    let grid = brownian.grid();
    let v = brownian.values();
    let dt = grid.dt();
    let base = s - grid.time(lo);
    let at_s = power_integral(v, lo, hi, dt, base, p);
    hs.iter()
        .map(|&h| if h == 0.0 { 0.0 } else { power_integral(v, lo, hi, dt, base + h, p) - at_s })
        .collect()
}

/// Splits a unit-length Brownian segment into `B_t = B_a + (t−a) Z + b_t`.
pub fn bridge_decompose(brownian_unit: &Path) -> Result<(f64, Path)> {
    let grid = *brownian_unit.grid();
    let span = grid.t_end() - grid.t0();
    if (span - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("bridge decomposition needs a unit interval, got length {span}")));
    }
    let v = brownian_unit.values();
    let n = grid.n();
    let z = v[n] - v[0];
    let mut bridge: Vec<f64> = (0..=n).map(|k| v[k] - v[0] - (k as f64 / n as f64) * z).collect();
    bridge[0] = 0.0;
    bridge[n] = 0.0;
    Ok((z, Path::new(grid, bridge)?))
}

/// Brownian path with the fBm built from it by the truncated two-sided
/// (Mandelbrot–Van Ness) representation, started at the grid start.
///
/// The kernel is left unnormalized, so `Var(W_t − W_s)` is a fixed multiple
/// of `|t−s|^{2H}` only up to the truncation of the past.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBundle {
    brownian: Path,
    fbm: Path,
    hurst: f64,
    history_horizon: f64,
}

impl NoiseBundle {
    /// `history_horizon` is the length of past data preceding the times of
    /// interest; it must fit inside the grid.
    pub fn from_brownian(brownian: Path, hurst: f64, history_horizon: f64) -> Result<Self> {
        check_hurst(hurst)?;
        let span = brownian.grid().t_end() - brownian.grid().t0();
        if !(history_horizon >= 0.0 && history_horizon <= span) {
            return Err(Error::param(
                "history_horizon",
                format!("must lie in [0, {span}], got {history_horizon}"),
            ));
        }
        let fbm = riemann_liouville(&brownian, hurst)?;
        Ok(Self { brownian, fbm, hurst, history_horizon })
    }

    /// Brownian motion on `[-history_horizon, t_end]` with step `dt`; the
    /// history is rounded up to whole steps.
    pub fn sample<R: rand::Rng + ?Sized>(
        hurst: f64,
        dt: f64,
        t_end: f64,
        history_horizon: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(history_horizon >= 0.0 && history_horizon.is_finite()) {
            return Err(Error::param("history_horizon", "must be finite and >= 0"));
        }
        if !(t_end > 0.0) {
            return Err(Error::param("t_end", "must be positive"));
        }
        let back = (history_horizon / dt - 1e-9).ceil().max(0.0) as usize;
        let fwd = (t_end / dt - 1e-9).ceil() as usize;
        let grid = TimeGrid::new(-(back as f64) * dt, dt, back + fwd)?;
        let brownian = crate::fbm::sample_brownian(grid, rng);
        Self::from_brownian(brownian, hurst, back as f64 * dt)
    }

    pub fn brownian(&self) -> &Path {
        &self.brownian
    }

    pub fn fbm(&self) -> &Path {
        &self.fbm
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn history_horizon(&self) -> f64 {
        self.history_horizon
    }

    pub fn grid(&self) -> &TimeGrid {
        self.brownian.grid()
    }

    /// `(N, P)` for the increment `W_t − W_s` between grid times `s <= t`,
    /// with the past integral truncated at the grid start.
    pub fn decompose_increment(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        let grid = self.grid();
        let i = grid.index_of(s)?;
        let j = grid.index_of(t)?;
        if i > j {
            return Err(Error::Domain(format!("need s <= t, got s = {s}, t = {t}")));
        }
        let n = riemann_liouville_at(&self.brownian, i, j, self.hurst)?;
        let window = PastWindow::new(grid.t0(), s, s)?;
        let h = (j - i) as f64 * grid.dt();
        let p = past_process(&self.brownian, window, &TimeGrid::new(h, 1.0, 1)?, self.hurst)?;
        Ok((n, p.values()[0]))
    }

    /// Standard deviation of the omitted past `∫_{-∞}^{t0} G(t−s, s, r) dB_r`.
    pub fn truncation_std(&self, s: f64, t: f64) -> f64 {
        truncation_std(self.hurst, s - self.grid().t0(), t - s)
    }
}

impl AsRef<Path> for NoiseBundle {
    fn as_ref(&self) -> &Path {
        &self.fbm
    }
}

/// `sqrt(∫_a^∞ ((y+h)^p − y^p)^2 dy)` with `p = H − 1/2`.
pub fn truncation_std(hurst: f64, a: f64, h: f64) -> f64 {
    if is_markov(hurst) || h <= 0.0 {
        return 0.0;
    }
    if a <= 0.0 {
        return f64::INFINITY;
    }
    let p = hurst - 0.5;
    let f = |y: f64| {
        let d = (y + h).powf(p) - y.powf(p);
        d * d
    };
    // Simpson in log y on [a, a e^L], then the asymptotic tail p² h² y^{2p−2}.
    let span = 14.0_f64;
    let m = 4000;
    let dx = span / m as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        let y = a * (i as f64 * dx).exp();
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(y) * y;
    }
    let upper = a * span.exp();
    let tail = p * p * h * h * upper.powf(2.0 * p - 1.0) / (1.0 - 2.0 * p);
    (sum * dx / 3.0 + tail).sqrt()
}
