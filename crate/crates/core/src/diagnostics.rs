//! Self-test of the fBm engine: empirical covariance against the closed
//! form, scale invariance of the M-norm, and the Markov degeneracies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, FbmGenerator, FbmMethod, EXACT_CAP};
use crate::grid::TimeGrid;
use crate::norms::norm_m;
use crate::parallel::map_indices;
use crate::seed::path_rng;
use crate::stats::ks_two_sample;
use crate::volterra::{kernel_g, past_process, riemann_liouville, PastWindow};
use crate::fbm::sample_brownian;

const M_NORM_NODES: usize = 128;
const M_NORM_DELTA: f64 = 0.1;
const MAX_PROBES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCheck {
    pub probe_nodes: Vec<usize>,
    pub max_abs_error: f64,
    /// Largest `|Ĉ − R|` in units of its standard error.
    pub max_se_ratio: f64,
    pub within_4se: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsCheck {
    pub distance: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub kernel_zero: bool,
    pub past_zero: bool,
    pub riemann_liouville_identity: bool,
}

impl Degeneracy {
    pub fn ok(&self) -> bool {
        self.kernel_zero && self.past_zero && self.riemann_liouville_identity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmDiagnostics {
    pub hurst: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub method: String,
    pub covariance: CovarianceCheck,
    /// Two-sample KS between `M(0,1)` and `M(0,4)` of Brownian samples.
    pub m_norm_ks: KsCheck,
    /// Present at `H = 1/2` only.
    pub degeneracy: Option<Degeneracy>,
}

/// Runs all checks on `samples` paths of `n` steps over `[0, 1]`; `n` must be
/// a power of two.
pub fn fbm_test(hurst: f64, n: usize, samples: usize, seed: u64) -> Result<FbmDiagnostics> {
    if n > EXACT_CAP {
        return Err(Error::CapExceeded { n, cap: EXACT_CAP });
    }
    if !n.is_power_of_two() {
        return Err(Error::param("n", format!("must be a power of two, got {n}")));
    }
    if samples < 2 {
        return Err(Error::param("samples", "need at least 2"));
    }
    let grid = TimeGrid::spanning(0.0, 1.0, n)?;
    let gen = FbmGenerator::new(grid, hurst)?;

    let mut probes: Vec<usize> = (0..MAX_PROBES).map(|i| ((i + 1) * n) / MAX_PROBES).collect();
    probes.extend([1, 2, n / 2 + 1]);
    probes.retain(|&k| k >= 1 && k <= n);
    probes.sort_unstable();
    probes.dedup();
    let m = probes.len();
    let rows = map_indices(samples, |i| {
        let path = gen.sample(&mut path_rng(seed, 0, i as u64));
        let v = path.values();
        let mut prods = Vec::with_capacity(m * (m + 1) / 2);
        for a in 0..m {
            for b in a..m {
                prods.push(v[probes[a]] * v[probes[b]]);
            }
        }
        prods
    });
    let mut sums = vec![0.0; m * (m + 1) / 2];
    for row in &rows {
        for (s, x) in sums.iter_mut().zip(row) {
            *s += x;
        }
    }
    let (mut max_abs, mut max_ratio, mut idx) = (0.0_f64, 0.0_f64, 0);
    for a in 0..m {
        for b in a..m {
            let (s, t) = (grid.time(probes[a]), grid.time(probes[b]));
            let r = fbm_covariance(s, t, hurst);
            let se = ((fbm_covariance(s, s, hurst) * fbm_covariance(t, t, hurst) + r * r) / samples as f64).sqrt();
            let err = (sums[idx] / samples as f64 - r).abs();
            max_abs = max_abs.max(err);
            max_ratio = max_ratio.max(err / se);
            idx += 1;
        }
    }

    let short = TimeGrid::spanning(0.0, 1.0, M_NORM_NODES)?;
    let long = TimeGrid::spanning(0.0, 4.0, M_NORM_NODES)?;
    let m_of = |grid: TimeGrid, stream: u64, span: f64| -> Result<Vec<f64>> {
        map_indices(samples, |i| norm_m(&sample_brownian(grid, &mut path_rng(seed, stream, i as u64)), 0.0, span, M_NORM_DELTA))
            .into_iter()
            .collect()
    };
    let (distance, p_value) = ks_two_sample(&m_of(short, 1, 1.0)?, &m_of(long, 2, 4.0)?);

    let degeneracy = if hurst == 0.5 { Some(markov_degeneracy(seed)?) } else { None };
    Ok(FbmDiagnostics {
        hurst,
        n,
        samples,
        seed,
        method: match gen.method() {
            FbmMethod::Circulant => "circulant",
            FbmMethod::Cholesky => "cholesky",
        }
        .into(),
        covariance: CovarianceCheck { probe_nodes: probes, max_abs_error: max_abs, max_se_ratio: max_ratio, within_4se: max_ratio < 4.0 },
        m_norm_ks: KsCheck { distance, p_value },
        degeneracy,
    })
}

fn markov_degeneracy(seed: u64) -> Result<Degeneracy> {
    let mut kernel_zero = true;
    for i in 0..50 {
        let s = 0.5 + i as f64 * 0.2;
        for (u, r) in [(0.0, s - 0.1), (0.3, s - 1.0), (2.0, s - 0.01), (7.5, -3.0)] {
            kernel_zero &= kernel_g(u, s, r, 0.5)? == 0.0;
        }
    }
    let grid = TimeGrid::new(-10.0, 0.01, 1500)?;
    let b = sample_brownian(grid, &mut path_rng(seed, 3, 0));
    let horizon = TimeGrid::new(0.0, 0.1, 50)?;
    let past = past_process(&b, PastWindow::new(-10.0, -1.0, 0.0)?, &horizon, 0.5)?;
    let rl = riemann_liouville(&b, 0.5)?;
    let v = b.values();
    Ok(Degeneracy {
        kernel_zero,
        past_zero: past.values().iter().all(|&x| x == 0.0),
        riemann_liouville_identity: rl.values().iter().zip(v).all(|(r, x)| *r == x - v[0]),
    })
}
