//! Integration of `X_t = x₀ + ∫_0^t b(X_s) ds + ε W^H_t` on a uniform grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::FbmGenerator;
use crate::flow::{phi, transition_point, ModelParams};
use crate::grid::{Path, TimeGrid};
use crate::parallel::map_indices;
use crate::seed::path_rng;
use crate::stats::ks_two_sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `X_{k+1} = X_k + b_reg(X_k) dt + ε ΔW_k`.
    Euler,
    /// `X_{k+1} = Φ_dt(X_k) + ε ΔW_k` with `Φ_dt` the exact signed flow.
    FlowSplitting,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "flow-splitting" => Ok(Scheme::FlowSplitting),
            other => Err(Error::param("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Default Euler regularization width `dt^{1/(1−γ)}`.
pub fn default_reg_delta(dt: f64, gamma: f64) -> f64 {
    dt.powf(1.0 / (1.0 - gamma))
}

/// Solution driven by the increments of `noise`, on the noise grid.
pub fn integrate<N: AsRef<Path> + ?Sized>(
    p: &ModelParams,
    noise: &N,
    x0: f64,
    scheme: Scheme,
) -> Result<Path> {
    integrate_with(p, noise.as_ref(), x0, scheme, None)
}

/// As [`integrate`], with an explicit Euler regularization width for `γ < 0`.
pub fn integrate_with(
    p: &ModelParams,
    noise: &Path,
    x0: f64,
    scheme: Scheme,
    reg_delta: Option<f64>,
) -> Result<Path> {
    if !(p.gamma > -1.0) {
        return Err(Error::Unsupported(format!(
            "γ = {} <= −1 needs the distributional drift, which is not simulated",
            p.gamma
        )));
    }
    if !x0.is_finite() {
        return Err(Error::param("x0", "must be finite"));
    }
    let grid = *noise.grid();
    let dt = grid.dt();
    let w = noise.values();
    let mut out = Vec::with_capacity(w.len());
    out.push(x0);
    let mut x = x0;
    let g = p.gamma;
    match scheme {
        Scheme::FlowSplitting => {
            let (ap, am) = (p.a_plus * dt, p.a_minus * dt);
            for k in 0..grid.n() {
                let drifted = if x > 0.0 {
                    phi(x, ap, g)
                } else if x < 0.0 {
                    -phi(-x, am, g)
                } else {
                    0.0
                };
                x = drifted + p.epsilon * (w[k + 1] - w[k]);
                if !x.is_finite() {
                    return Err(Error::Integration { step: k + 1, value: x });
                }
                out.push(x);
            }
        }
        Scheme::Euler => {
            let reg = reg_delta.unwrap_or_else(|| default_reg_delta(dt, g));
            if g < 0.0 && !(reg > 0.0) {
                return Err(Error::param("reg_delta", "must be positive for γ < 0"));
            }
            for k in 0..grid.n() {
                let b = if x == 0.0 {
                    0.0
                } else {
                    let mag = if g < 0.0 { x.abs().max(reg) } else { x.abs() }.powf(g);
                    if x > 0.0 {
                        p.a_plus * mag
                    } else {
                        -p.a_minus * mag
                    }
                };
                x += b * dt + p.epsilon * (w[k + 1] - w[k]);
                if !x.is_finite() {
                    return Err(Error::Integration { step: k + 1, value: x });
                }
                out.push(x);
            }
        }
    }
    Path::new(grid, out)
}

/// KS comparison of `X^ε_{t t_ε} / x_ε` against `X¹_t` at one probe time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingProbe {
    pub t: f64,
    pub ks_distance: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub epsilon: f64,
    pub t_eps: f64,
    pub x_eps: f64,
    pub n_paths: usize,
    pub probes: Vec<ScalingProbe>,
}

/// Simulates `n_paths` of `X^ε` on `[0, T t_ε]` and of `X¹` on `[0, T]` from
/// 0 with flow splitting, using `unit_grid` (start 0, span `T`) for `X¹` and
/// its image under `t ↦ t t_ε` for `X^ε`. The two ensembles use independent
/// seed streams.
pub fn scaling_check(
    p: &ModelParams,
    n_paths: usize,
    unit_grid: TimeGrid,
    probes: &[f64],
    seed: u64,
) -> Result<ScalingReport> {
    if n_paths < 100 {
        return Err(Error::Refused(format!("scaling check needs >= 100 paths, got {n_paths}")));
    }
    if !(p.epsilon < 1.0) {
        return Err(Error::param("epsilon", "scaling check needs ε < 1"));
    }
    if unit_grid.t0() != 0.0 {
        return Err(Error::param("unit_grid", "must start at 0"));
    }
    let tp = transition_point(p);
    let unit = p.with_epsilon(1.0)?;
    let eps_grid = TimeGrid::new(0.0, unit_grid.dt() * tp.t_eps, unit_grid.n())?;
    let idx: Vec<usize> = probes.iter().map(|&t| unit_grid.index_of(t)).collect::<Result<_>>()?;

    let ensemble = |params: &ModelParams, grid: TimeGrid, stream: u64, scale: f64| -> Result<Vec<Vec<f64>>> {
        let gen = FbmGenerator::new(grid, p.hurst)?;
        let rows = map_indices(n_paths, |i| -> Result<Vec<f64>> {
            let w = gen.sample(&mut path_rng(seed, stream, i as u64));
            let x = integrate(params, &w, 0.0, Scheme::FlowSplitting)?;
            Ok(idx.iter().map(|&k| x.values()[k] / scale).collect())
        });
        rows.into_iter().collect()
    };
    let small = ensemble(p, eps_grid, 0, tp.x_eps)?;
    let big = ensemble(&unit, unit_grid, 1, 1.0)?;

    let probes = probes
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let a: Vec<f64> = small.iter().map(|r| r[j]).collect();
            let b: Vec<f64> = big.iter().map(|r| r[j]).collect();
            let (d, pv) = ks_two_sample(&a, &b);
            ScalingProbe { t, ks_distance: d, p_value: pv }
        })
        .collect();
    Ok(ScalingReport { epsilon: p.epsilon, t_eps: tp.t_eps, x_eps: tp.x_eps, n_paths, probes })
}
