//! Exact fractional Brownian motion on uniform grids.
//!
//! The increments (fractional Gaussian noise) are synthesized by circulant
//! embedding of their Toeplitz covariance (Davies–Harte / Wood–Chan). When the
//! embedding has genuinely negative eigenvalues the generator falls back to a
//! Cholesky factorization for small grids and fails loudly otherwise.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::seed::rng_from_seed;

/// Largest step count accepted by the exact generator.
pub const EXACT_CAP: usize = 1 << 20;

/// Largest step count for which the O(n²) Cholesky fallback is attempted.
pub const CHOLESKY_MAX: usize = 2048;

/// Eigenvalues below `-EIGEN_TOL * max` are treated as a failed embedding;
/// anything between that and zero is rounding noise and clamped.
const EIGEN_TOL: f64 = 1e-10;

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::param("hurst", format!("must lie in (0, 1), got {h}")))
    }
}

/// Autocovariance of unit-spacing fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    let below = if k >= 1.0 { (k - 1.0).powf(h2) } else { 1.0 };
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + below)
}

/// fBm covariance `R(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (s.abs().powf(h2) + t.abs().powf(h2) - (t - s).abs().powf(h2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    Circulant,
    Cholesky,
}

enum Factor {
    /// `H = 1/2`: independent increments with this standard deviation.
    White { sd: f64 },
    Circulant { scale: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    /// Row-major lower triangle.
    Cholesky { lower: Vec<f64> },
}

/// Reusable exact fBm sampler for one grid and Hurst index.
pub struct FbmGenerator {
    grid: TimeGrid,
    hurst: f64,
    factor: Factor,
}

impl fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("grid", &self.grid)
            .field("hurst", &self.hurst)
            .field("method", &self.method())
            .finish()
    }
}

impl FbmGenerator {
    /// Circulant embedding, falling back to Cholesky for `n <= CHOLESKY_MAX`.
    pub fn new(grid: TimeGrid, hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        let n = grid.n();
        if n > EXACT_CAP {
            return Err(Error::CapExceeded { n, cap: EXACT_CAP });
        }
        if hurst == 0.5 {
            return Ok(Self { grid, hurst, factor: Factor::White { sd: grid.dt().sqrt() } });
        }
        match circulant_factor(grid, hurst) {
            Ok(factor) => Ok(Self { grid, hurst, factor }),
            Err(Error::NotPositiveDefinite { .. }) if n <= CHOLESKY_MAX => {
                Self::with_method(grid, hurst, FbmMethod::Cholesky)
            }
            Err(e) => Err(e),
        }
    }

    pub fn with_method(grid: TimeGrid, hurst: f64, method: FbmMethod) -> Result<Self> {
        check_hurst(hurst)?;
        let n = grid.n();
        let factor = match method {
            FbmMethod::Circulant => {
                if n > EXACT_CAP {
                    return Err(Error::CapExceeded { n, cap: EXACT_CAP });
                }
                circulant_factor(grid, hurst)?
            }
            FbmMethod::Cholesky => {
                if n > CHOLESKY_MAX {
                    return Err(Error::CapExceeded { n, cap: CHOLESKY_MAX });
                }
                cholesky_factor(grid, hurst)?
            }
        };
        Ok(Self { grid, hurst, factor })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn method(&self) -> FbmMethod {
        match self.factor {
            Factor::White { .. } | Factor::Circulant { .. } => FbmMethod::Circulant,
            Factor::Cholesky { .. } => FbmMethod::Cholesky,
        }
    }

    /// Fills `out` (length `n`) with one draw of the increments.
    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.grid.n();
        assert_eq!(out.len(), n, "increment buffer must have n entries");
        match &self.factor {
            Factor::White { sd } => {
                for o in out.iter_mut() {
                    *o = sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Factor::Circulant { scale, fft } => {
                let m = 2 * n;
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                buf[0] = Complex64::new(scale[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
                buf[n] = Complex64::new(scale[n] * rng.sample::<f64, _>(StandardNormal), 0.0);
                for k in 1..n {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let v = Complex64::new(re, im) * scale[k];
                    buf[k] = v;
                    buf[m - k] = v.conj();
                }
                fft.process(&mut buf);
                for (o, z) in out.iter_mut().zip(&buf) {
                    *o = z.re;
                }
            }
            Factor::Cholesky { lower } => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &lower[i * (i + 1) / 2..(i + 1) * (i + 2) / 2];
                    *o = row.iter().zip(&z).map(|(l, z)| l * z).sum();
                }
            }
        }
    }

    /// One fBm path on the grid, starting at 0.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Path {
        let mut inc = vec![0.0; self.grid.n()];
        self.sample_increments(rng, &mut inc);
        cumulative(self.grid, &inc)
    }
}

fn cumulative(grid: TimeGrid, increments: &[f64]) -> Path {
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    values.push(acc);
    for d in increments {
        acc += d;
        values.push(acc);
    }
    Path::new(grid, values).expect("gaussian samples are finite")
}

fn circulant_factor(grid: TimeGrid, hurst: f64) -> Result<Factor> {
    let n = grid.n();
    let m = 2 * n;
    let var = grid.dt().powf(2.0 * hurst);
    let mut row = vec![Complex64::new(0.0, 0.0); m];
    for (j, r) in row.iter_mut().take(n + 1).enumerate() {
        *r = Complex64::new(var * fgn_autocovariance(j, hurst), 0.0);
    }
    for j in 1..n {
        row[m - j] = row[j];
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    let max = row.iter().fold(0.0_f64, |a, z| a.max(z.re));
    let min = row.iter().fold(f64::INFINITY, |a, z| a.min(z.re));
    if min < -EIGEN_TOL * max {
        return Err(Error::NotPositiveDefinite { n, min_eigenvalue: min });
    }
    let scale = row
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let lambda = z.re.max(0.0);
            if k == 0 || k == n {
                (lambda / m as f64).sqrt()
            } else {
                (lambda / (2 * m) as f64).sqrt()
            }
        })
        .collect();
    Ok(Factor::Circulant { scale, fft })
}

fn cholesky_factor(grid: TimeGrid, hurst: f64) -> Result<Factor> {
    let n = grid.n();
    let var = grid.dt().powf(2.0 * hurst);
    let cov: Vec<f64> = (0..n).map(|k| var * fgn_autocovariance(k, hurst)).collect();
    let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let mut lower = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        for j in 0..=i {
            let mut s = cov[i - j];
            for k in 0..j {
                s -= lower[idx(i, k)] * lower[idx(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite { n, min_eigenvalue: s });
                }
                lower[idx(i, i)] = s.sqrt();
            } else {
                lower[idx(i, j)] = s / lower[idx(j, j)];
            }
        }
    }
    Ok(Factor::Cholesky { lower })
}

/// Exact fBm sample on `grid` for a fixed seed.
pub fn generate_fbm_exact(grid: TimeGrid, hurst: f64, seed: u64) -> Result<Path> {
    let generator = FbmGenerator::new(grid, hurst)?;
    Ok(generator.sample(&mut rng_from_seed(seed)))
}

/// Standard Brownian motion on `grid`, started at 0.
pub fn sample_brownian<R: Rng + ?Sized>(grid: TimeGrid, rng: &mut R) -> Path {
    let sd = grid.dt().sqrt();
    let inc: Vec<f64> = (0..grid.n()).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    cumulative(grid, &inc)
}
