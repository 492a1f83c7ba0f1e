//! Selection detection on simulated paths, probability and tail estimators,
//! and the admissibility and envelope diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{phi, transition_point, DriftClass, ModelParams, Sign};
use crate::grid::{Path, TimeGrid};
use crate::norms::holder_exceeds;
use crate::stats::{quantile_sorted, wilson};
use crate::volterra::{past_at, NoiseBundle};

/// Paths must cover at least this many transition times.
pub const MIN_HORIZON_TEPS: f64 = 10.0;

/// At most this many envelope violations are kept per outcome; the total
/// count is always exact.
pub const MAX_RECORDED_VIOLATIONS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MarginMode {
    /// `φ(x_ε, A t) − ε t_ε^{H−α} t^α`.
    Paper,
    /// `(1 − δ) φ(x_ε, A t)`.
    Relative { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub alpha: f64,
    pub margin: MarginMode,
    /// Latest admissible selection time, as a distance from the horizon in
    /// units of `t_ε`.
    pub min_hold_teps: f64,
}

impl SelectionConfig {
    pub fn new(alpha: f64, margin: MarginMode) -> Self {
        Self { alpha, margin, min_hold_teps: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selected {
    Plus,
    Minus,
    Undecided,
}

impl Selected {
    pub fn label(self) -> &'static str {
        match self {
            Selected::Plus => "+",
            Selected::Minus => "-",
            Selected::Undecided => "undecided",
        }
    }
}

impl From<Sign> for Selected {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => Selected::Plus,
            Sign::Minus => Selected::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub time: f64,
    /// Envelope minus signed path value, in state units.
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub sign: Selected,
    /// Time since the path start after which the envelope holds.
    pub psi_hat: Option<f64>,
    pub violations: Vec<Violation>,
    pub n_violations: usize,
    pub max_deficit: f64,
}

/// Signed envelope `E_±(j dt)` at offsets `j = 0..=n`, in state units.
fn envelope(p: &ModelParams, sign: Sign, cfg: &SelectionConfig, dt: f64, n: usize) -> Vec<f64> {
    let tp = transition_point(p);
    let a = p.amplitude(sign);
    (0..=n)
        .map(|j| {
            let u = j as f64 * dt / tp.t_eps;
            let base = phi(1.0, a * u, p.gamma);
            tp.x_eps
                * match cfg.margin {
                    MarginMode::Paper => base - u.powf(cfg.alpha),
                    MarginMode::Relative { delta } => (1.0 - delta) * base,
                }
        })
        .collect()
}

pub fn detect_selection(
    x: &Path,
    p: &ModelParams,
    alpha: f64,
    margin: MarginMode,
) -> Result<SelectionOutcome> {
    detect_selection_with(x, p, &SelectionConfig::new(alpha, margin))
}

/// `ψ̂` is the earliest node `s <= T − min_hold` from which
/// `sign(X_s) X_{s+t}` stays strictly above the envelope at every later node.
pub fn detect_selection_with(x: &Path, p: &ModelParams, cfg: &SelectionConfig) -> Result<SelectionOutcome> {
    SelectionDetector::new(p, cfg, x.grid())?.detect(x)
}

/// Detection with the envelopes precomputed for one grid, for batches.
#[derive(Debug, Clone)]
pub struct SelectionDetector {
    grid: TimeGrid,
    hold: usize,
    env_plus: Vec<f64>,
    env_minus: Vec<f64>,
}

impl SelectionDetector {
    pub fn new(p: &ModelParams, cfg: &SelectionConfig, grid: &TimeGrid) -> Result<Self> {
        if let MarginMode::Relative { delta } = cfg.margin {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::param("margin.delta", format!("must lie in (0, 1), got {delta}")));
            }
        }
        if !(cfg.alpha > 0.0) {
            return Err(Error::param("alpha", "must be positive"));
        }
        let tp = transition_point(p);
        let n = grid.n();
        let dt = grid.dt();
        let horizon = n as f64 * dt;
        if horizon < MIN_HORIZON_TEPS * tp.t_eps * (1.0 - 1e-9) {
            return Err(Error::Refused(format!(
                "horizon {horizon} is shorter than {MIN_HORIZON_TEPS} t_ε = {}",
                MIN_HORIZON_TEPS * tp.t_eps
            )));
        }
        let hold = (cfg.min_hold_teps * tp.t_eps / dt - 1e-9).ceil().max(1.0) as usize;
        Ok(Self {
            grid: *grid,
            hold,
            env_plus: envelope(p, Sign::Plus, cfg, dt, n),
            env_minus: envelope(p, Sign::Minus, cfg, dt, n),
        })
    }

    pub fn detect(&self, x: &Path) -> Result<SelectionOutcome> {
        if !self.grid.same_as(x.grid()) {
            return Err(Error::GridMismatch(format!("detector grid {:?} vs path grid {:?}", self.grid, x.grid())));
        }
        let n = self.grid.n();
        let dt = self.grid.dt();
        let last_anchor = n.saturating_sub(self.hold);
        let v = x.values();

        let mut recorded = vec![false; n + 1];
        let mut outcome = SelectionOutcome {
            sign: Selected::Undecided,
            psi_hat: None,
            violations: Vec::new(),
            n_violations: 0,
            max_deficit: 0.0,
        };
        for k in 0..=last_anchor {
            let Some(sign) = Sign::of(v[k]) else { continue };
            let (env, f) = match sign {
                Sign::Plus => (&self.env_plus, 1.0),
                Sign::Minus => (&self.env_minus, -1.0),
            };
            let fail = (1..=n - k).find(|&j| f * v[k + j] <= env[j]);
            match fail {
                None => {
                    outcome.sign = sign.into();
                    outcome.psi_hat = Some(k as f64 * dt);
                    break;
                }
                Some(j) => {
                    let node = k + j;
                    if !recorded[node] {
                        recorded[node] = true;
                        let deficit = env[j] - f * v[node];
                        outcome.n_violations += 1;
                        outcome.max_deficit = outcome.max_deficit.max(deficit);
                        if outcome.violations.len() < MAX_RECORDED_VIOLATIONS {
                            outcome.violations.push(Violation { time: node as f64 * dt, deficit });
                        }
                    }
                }
            }
        }
        Ok(outcome)
    }
}

/// Counts, frequencies of the whole batch (they sum to one) and Wilson
/// intervals; `p_plus_decided` conditions on the decided paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub n: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_undecided: usize,
    pub p_plus: f64,
    pub p_minus: f64,
    pub undecided: f64,
    pub p_plus_ci: (f64, f64),
    pub p_minus_ci: (f64, f64),
    pub undecided_ci: (f64, f64),
    pub p_plus_decided: f64,
    pub p_plus_decided_ci: (f64, f64),
    pub confidence_z: f64,
}

impl ProbEstimate {
    pub fn decided(&self) -> usize {
        self.n_plus + self.n_minus
    }

    pub fn decided_fraction(&self) -> f64 {
        self.decided() as f64 / self.n as f64
    }

    /// Binomial standard error of `p_plus_decided`.
    pub fn p_plus_decided_se(&self) -> f64 {
        let p = self.p_plus_decided;
        (p * (1.0 - p) / self.decided() as f64).sqrt()
    }
}

/// Minimum number of decided outcomes for [`estimate_probs`].
pub const MIN_DECIDED: usize = 100;

pub fn estimate_probs<'a, I>(outcomes: I) -> Result<ProbEstimate>
where
    I: IntoIterator<Item = &'a Selected>,
{
    let (mut n_plus, mut n_minus, mut n_undecided) = (0, 0, 0);
    for s in outcomes {
        match s {
            Selected::Plus => n_plus += 1,
            Selected::Minus => n_minus += 1,
            Selected::Undecided => n_undecided += 1,
        }
    }
    let decided = n_plus + n_minus;
    if decided < MIN_DECIDED {
        return Err(Error::Refused(format!(
            "need at least {MIN_DECIDED} decided outcomes, got {decided}"
        )));
    }
    let n = decided + n_undecided;
    let z = 1.96;
    let frac = |k: usize| k as f64 / n as f64;
    Ok(ProbEstimate {
        n,
        n_plus,
        n_minus,
        n_undecided,
        p_plus: frac(n_plus),
        p_minus: frac(n_minus),
        undecided: frac(n_undecided),
        p_plus_ci: wilson(n_plus, n, z),
        p_minus_ci: wilson(n_minus, n, z),
        undecided_ci: wilson(n_undecided, n, z),
        p_plus_decided: n_plus as f64 / decided as f64,
        p_plus_decided_ci: wilson(n_plus, decided, z),
        confidence_z: z,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub kappa_hat: f64,
    pub intercept: f64,
    /// Decay rate `a` in `ln S(z) ≈ c − a z^κ`.
    pub rate: f64,
    pub r_squared: f64,
    pub z_grid: Vec<f64>,
    pub log_surv: Vec<f64>,
}

pub const TAIL_MIN_SAMPLES: usize = 1000;
const KAPPA_GRID: usize = 40;
const KAPPA_RANGE: (f64, f64) = (0.05, 2.0);
const DEFAULT_Z_POINTS: usize = 30;

/// Least-squares fit of `ln P(ψ/t_ε > z) = c − a z^κ` over a log-spaced κ
/// grid, keeping the best κ with `a > 0`.
///
/// Without `z_grid`, the nodes are sample quantiles whose survival runs
/// log-uniformly from 1/2 down to `10/n`.
pub fn tail_fit(psi_samples: &[f64], t_eps: f64, z_grid: Option<&[f64]>) -> Result<TailFit> {
    let n = psi_samples.len();
    if n < TAIL_MIN_SAMPLES {
        return Err(Error::Refused(format!("tail fit needs >= {TAIL_MIN_SAMPLES} samples, got {n}")));
    }
    if !(t_eps > 0.0) {
        return Err(Error::param("t_eps", "must be positive"));
    }
    let mut z: Vec<f64> = psi_samples.iter().map(|s| s / t_eps).collect();
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("psi_samples", "must be finite"));
    }
    z.sort_by(f64::total_cmp);
    if z[0] == z[n - 1] {
        return Err(Error::Refused("degenerate sample: all values equal".into()));
    }
    let surv = |x: f64| (n - z.partition_point(|&v| v <= x)) as f64 / n as f64;
    let floor = 10.0 / n as f64;

    let grid: Vec<f64> = match z_grid {
        Some(g) => {
            if g.len() < 3 || g.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::param("z_grid", "needs >= 3 strictly increasing points"));
            }
            if let Some(&bad) = g.iter().find(|&&x| surv(x) < floor) {
                return Err(Error::param("z_grid", format!("survival at z = {bad} is below 10/n")));
            }
            g.to_vec()
        }
        None => {
            let (hi, lo) = (0.5_f64.ln(), floor.ln());
            let mut g: Vec<f64> = (0..DEFAULT_Z_POINTS)
                .map(|i| {
                    let s = (hi + (lo - hi) * i as f64 / (DEFAULT_Z_POINTS - 1) as f64).exp();
                    quantile_sorted(&z, 1.0 - s)
                })
                .collect();
            g.dedup_by(|a, b| *a <= *b);
            g.retain(|&x| surv(x) >= floor && surv(x) > 0.0);
            if g.len() < 3 {
                return Err(Error::Refused("too few distinct quantiles for a tail fit".into()));
            }
            g
        }
    };
    let log_surv: Vec<f64> = grid.iter().map(|&x| surv(x).ln()).collect();

    let m = grid.len() as f64;
    let y_mean = log_surv.iter().sum::<f64>() / m;
    let sst: f64 = log_surv.iter().map(|y| (y - y_mean).powi(2)).sum();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for i in 0..KAPPA_GRID {
        let (lo, hi) = KAPPA_RANGE;
        let kappa = lo * (hi / lo).powf(i as f64 / (KAPPA_GRID - 1) as f64);
        let xs: Vec<f64> = grid.iter().map(|&x| x.max(0.0).powf(kappa)).collect();
        let x_mean = xs.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
        if sxx <= 0.0 {
            continue;
        }
        let sxy: f64 = xs.iter().zip(&log_surv).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
        let slope = sxy / sxx;
        if !(slope < 0.0) {
            continue;
        }
        let intercept = y_mean - slope * x_mean;
        let ssr: f64 = xs
            .iter()
            .zip(&log_surv)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        if best.is_none_or(|b| ssr < b.3) {
            best = Some((kappa, intercept, -slope, ssr));
        }
    }
    let (kappa_hat, intercept, rate, ssr) =
        best.ok_or_else(|| Error::Refused("no κ gives a decaying fit".into()))?;
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    Ok(TailFit { kappa_hat, intercept, rate, r_squared, z_grid: grid, log_surv })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub ok: bool,
    /// Worst remote-past and recent-past ratios over the probe grid.
    pub worst_ratios: (f64, f64),
}

/// Evaluates both admissibility suprema over the probe pairs `(t, s)`:
///
/// ```text
/// |P_s^{(t0, τ−1], τ+t}| (1+t)^{(σ−H−2δ)ξ} / s^σ      ≤ c_Af
/// |P_s^{[τ−1, τ],  τ+t}| / s^{H−δ}                    ≤ c_Ac
/// ```
///
/// with the remote past truncated at the grid start `t0`.
#[allow(clippy::too_many_arguments)]
pub fn admissibility_check(
    noise: &NoiseBundle,
    tau: f64,
    sigma: f64,
    xi: f64,
    delta: f64,
    c_af: f64,
    c_ac: f64,
    probe_grid: &[(f64, f64)],
) -> Result<Admissibility> {
    let grid = noise.grid();
    let hurst = noise.hurst();
    let (Ok(k_tau), Ok(k_recent)) = (grid.index_of(tau), grid.index_of(tau - 1.0)) else {
        return Err(Error::Refused(format!(
            "τ = {tau} and τ − 1 must be nodes of the noise grid [{}, {}]",
            grid.t0(),
            grid.t_end()
        )));
    };
    if k_recent == 0 {
        return Err(Error::Refused("no remote past before τ − 1".into()));
    }
    if probe_grid.iter().any(|&(t, s)| !(t > 0.0 && s > 0.0)) {
        return Err(Error::param("probe_grid", "probes need t > 0 and s > 0"));
    }
    let b = noise.brownian();
    let decay = (sigma - hurst - 2.0 * delta) * xi;
    let (mut worst_f, mut worst_c) = (0.0_f64, 0.0_f64);
    for &(t, s) in probe_grid {
        let restart = tau + t;
        let remote = past_at(b, 0, k_recent, restart, &[s], hurst)[0];
        let recent = past_at(b, k_recent, k_tau, restart, &[s], hurst)[0];
        worst_f = worst_f.max(remote.abs() * (1.0 + t).powf(decay) / s.powf(sigma));
        worst_c = worst_c.max(recent.abs() / s.powf(hurst - delta));
    }
    Ok(Admissibility { ok: worst_f <= c_af && worst_c <= c_ac, worst_ratios: (worst_f, worst_c) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundCheck {
    pub ok: bool,
    pub max_excess: f64,
    pub tolerance: f64,
}

/// Pathwise bound on `[t0, t0+1]` for a solution started at 0:
/// `γ > 0`: `−φ(2ε‖W‖, A⁻t) <= X_t <= φ(2ε‖W‖, A⁺t)`;
/// `γ <= 0`: `−φ(0, A⁻t) − 2ε‖W‖ <= X_t <= φ(0, A⁺t) + 2ε‖W‖`,
/// with `‖W‖` the sup of `|W_t − W_{t0}|` over the same nodes. Passes when
/// the largest excess is within `10 dt^{1/2}`.
pub fn upper_bound_check<N: AsRef<Path> + ?Sized>(x: &Path, noise: &N, p: &ModelParams) -> Result<UpperBoundCheck> {
    let w = noise.as_ref();
    let grid = x.grid();
    if !grid.same_as(w.grid()) {
        return Err(Error::GridMismatch(format!("path grid {:?} vs noise grid {:?}", grid, w.grid())));
    }
    let (_, hi) = grid
        .index_range(grid.t0(), grid.t0() + 1.0)
        .ok_or_else(|| Error::GridMismatch("no nodes on [0, 1]".into()))?;
    let wv = w.values();
    let w_sup = wv[..=hi].iter().map(|v| (v - wv[0]).abs()).fold(0.0, f64::max);
    let m = 2.0 * p.epsilon * w_sup;
    let g = p.gamma;
    let class = DriftClass::of(g);
    let mut max_excess = 0.0_f64;
    for (k, &xk) in x.values()[..=hi].iter().enumerate() {
        let t = k as f64 * grid.dt();
        let (lower, upper) = match class {
            DriftClass::Increasing => (-phi(m, p.a_minus * t, g), phi(m, p.a_plus * t, g)),
            DriftClass::Decreasing => (-phi(0.0, p.a_minus * t, g) - m, phi(0.0, p.a_plus * t, g) + m),
        };
        max_excess = max_excess.max(xk - upper).max(lower - xk);
    }
    let tolerance = 10.0 * grid.dt().sqrt();
    Ok(UpperBoundCheck { ok: max_excess <= tolerance, max_excess, tolerance })
}

/// `T_k = Σ_{j=1}^k q^j` for `k = 1..=k_max`.
pub fn geometric_ladder(q: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::param("q", format!("must exceed 1, got {q}")));
    }
    let mut out = Vec::with_capacity(k_max);
    let (mut sum, mut pow) = (0.0, 1.0);
    for _ in 0..k_max {
        pow *= q;
        sum += pow;
        out.push(sum);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderIndex {
    Finite(usize),
    /// No rung up to `k_max` exceeded its threshold.
    Infinite,
}

/// First rung `k < k_max` of `[T_k, T_{k+1}]` (`T_0 = 0`) on which the
/// `(1/2 − δ)`-Hölder seminorm over grid nodes exceeds `c q^{k(α−H)}`.
pub fn holder_ladder_check(
    brownian: &Path,
    q: f64,
    alpha: f64,
    hurst: f64,
    c: f64,
    delta: f64,
    k_max: usize,
) -> Result<LadderIndex> {
    let mut times = vec![0.0];
    times.extend(geometric_ladder(q, k_max)?);
    let grid = brownian.grid();
    let end = times[k_max];
    if grid.t0() > 0.0 || grid.t_end() < end * (1.0 - 1e-12) {
        return Err(Error::Refused(format!(
            "path covers [{}, {}] but the ladder needs [0, {end}]",
            grid.t0(),
            grid.t_end()
        )));
    }
    let v = brownian.values();
    for k in 0..k_max {
        let Some((lo, hi)) = grid.index_range(times[k], times[k + 1]) else { continue };
        let threshold = c * q.powf(k as f64 * (alpha - hurst));
        if holder_exceeds(&v[lo..=hi], grid.dt(), 0.5 - delta, threshold) {
            return Ok(LadderIndex::Finite(k));
        }
    }
    Ok(LadderIndex::Infinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::extremal_solution;
    use crate::grid::TimeGrid;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn params() -> ModelParams {
        ModelParams::new(0.5, 0.5, 1.0, 1.0, 0.1).unwrap()
    }

    fn grid_teps(p: &ModelParams, horizon: f64, steps_per_teps: usize) -> TimeGrid {
        let t = transition_point(p).t_eps;
        TimeGrid::new(0.0, t / steps_per_teps as f64, (horizon * steps_per_teps as f64) as usize).unwrap()
    }

    #[test]
    fn extremal_from_transition_point_is_selected_at_zero() {
        let p = params();
        let tp = transition_point(&p);
        let g = grid_teps(&p, 20.0, 100);
        // Shifted extremal: φ(x_ε, A t) plus a hair so the strict inequality holds.
        let x = Path::from_fn(g, |t| phi(tp.x_eps, p.a_plus * t, p.gamma) * (1.0 + 1e-9)).unwrap();
        for margin in [MarginMode::Paper, MarginMode::Relative { delta: 0.1 }] {
            let o = detect_selection(&x, &p, 1.2, margin).unwrap();
            assert_eq!(o.sign, Selected::Plus);
            assert_eq!(o.psi_hat, Some(0.0));
            assert_eq!(o.n_violations, 0);
        }
        assert!(extremal_solution(1.0, Sign::Plus, &p).unwrap() < phi(tp.x_eps, 1.0, 0.5));
    }

    #[test]
    fn jump_onto_positive_extremal_gives_switch_time() {
        let p = params();
        let tp = transition_point(&p);
        let g = grid_teps(&p, 20.0, 100);
        let s_idx = 500;
        let s = g.time(s_idx);
        let x = Path::from_fn(g, |t| {
            if t < s - 1e-12 {
                -phi(tp.x_eps, p.a_minus * t, p.gamma) * 2.0 - 1.0
            } else {
                phi(tp.x_eps, p.a_plus * (t - s), p.gamma) * (1.0 + 1e-9)
            }
        })
        .unwrap();
        let o = detect_selection(&x, &p, 1.2, MarginMode::Paper).unwrap();
        assert_eq!(o.sign, Selected::Plus);
        assert!((o.psi_hat.unwrap() - s).abs() < 1e-12);
        assert!(o.n_violations > 0);
    }

    #[test]
    fn flat_path_is_undecided_and_short_horizon_refused() {
        let p = params();
        let g = grid_teps(&p, 20.0, 50);
        let zero = Path::zeros(g);
        let o = detect_selection(&zero, &p, 1.2, MarginMode::Paper).unwrap();
        assert_eq!(o.sign, Selected::Undecided);
        assert_eq!(o.psi_hat, None);
        let short = Path::zeros(grid_teps(&p, 5.0, 50));
        assert!(matches!(detect_selection(&short, &p, 1.2, MarginMode::Paper), Err(Error::Refused(_))));
    }

    #[test]
    fn probs_partition_and_refusal() {
        let mut v = vec![Selected::Plus; 150];
        let e = estimate_probs(&v).unwrap();
        assert_eq!(e.p_plus, 1.0);
        assert_eq!(e.p_plus_ci.1, 1.0);
        v.extend(vec![Selected::Minus; 50]);
        v.extend(vec![Selected::Undecided; 7]);
        let e = estimate_probs(&v).unwrap();
        assert!((e.p_plus + e.p_minus + e.undecided - 1.0).abs() < 1e-15);
        assert_eq!(e.p_plus_decided, 0.75);
        assert!(estimate_probs(&vec![Selected::Plus; 99]).is_err());
    }

    fn weibull(n: usize, kappa: f64, scale: f64, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                scale * (-(1.0 - u).ln()).powf(1.0 / kappa)
            })
            .collect()
    }

    #[test]
    fn tail_fit_recovers_known_laws() {
        let w = tail_fit(&weibull(10_000, 0.5, 1.0, 1), 1.0, None).unwrap();
        assert!((w.kappa_hat - 0.5).abs() < 0.1, "{}", w.kappa_hat);
        assert!(w.r_squared > 0.99);
        let e = tail_fit(&weibull(10_000, 1.0, 1.0, 2), 1.0, None).unwrap();
        assert!((e.kappa_hat - 1.0).abs() < 0.1, "{}", e.kappa_hat);
        assert!(w.z_grid.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn tail_fit_shift_insensitive() {
        let t_eps = 0.01;
        let s = weibull(10_000, 0.5, 20.0 * t_eps, 3);
        let shifted: Vec<f64> = s.iter().map(|x| x + t_eps).collect();
        let a = tail_fit(&s, t_eps, None).unwrap();
        let b = tail_fit(&shifted, t_eps, None).unwrap();
        assert!((a.kappa_hat - b.kappa_hat).abs() < 0.05, "{} {}", a.kappa_hat, b.kappa_hat);
    }

    #[test]
    fn tail_fit_refusals() {
        assert!(tail_fit(&vec![1.0; 2000], 1.0, None).is_err());
        assert!(tail_fit(&[1.0, 2.0], 1.0, None).is_err());
        let s = weibull(2000, 1.0, 1.0, 4);
        assert!(tail_fit(&s, 1.0, Some(&[0.1, 0.2, 100.0])).is_err());
    }

    fn bundle(hurst: f64, scale: f64) -> NoiseBundle {
        let mut rng = rng_from_seed(5);
        let g = TimeGrid::new(-30.0, 0.01, 3500).unwrap();
        let b = crate::fbm::sample_brownian(g, &mut rng).map(|v| v * scale).unwrap();
        NoiseBundle::from_brownian(b, hurst, 30.0).unwrap()
    }

    #[test]
    fn admissibility_degenerate_cases() {
        let probes = [(0.5, 0.5), (1.0, 2.0), (3.0, 0.1)];
        let markov = admissibility_check(&bundle(0.5, 1.0), 2.0, 0.9, 0.3, 0.01, 1.0, 1.0, &probes).unwrap();
        assert_eq!(markov.worst_ratios, (0.0, 0.0));
        assert!(markov.ok);
        let zero = admissibility_check(&bundle(0.3, 0.0), 2.0, 0.9, 0.3, 0.01, 1.0, 1.0, &probes).unwrap();
        assert_eq!(zero.worst_ratios, (0.0, 0.0));
        let one = admissibility_check(&bundle(0.3, 1.0), 2.0, 0.9, 0.3, 0.01, 1.0, 1.0, &probes).unwrap();
        let two = admissibility_check(&bundle(0.3, 2.0), 2.0, 0.9, 0.3, 0.01, 1.0, 1.0, &probes).unwrap();
        assert!(one.worst_ratios.0 > 0.0);
        assert_eq!(two.worst_ratios.0, 2.0 * one.worst_ratios.0);
        assert_eq!(two.worst_ratios.1, 2.0 * one.worst_ratios.1);
        assert!(admissibility_check(&bundle(0.3, 1.0), 100.0, 0.9, 0.3, 0.01, 1.0, 1.0, &probes).is_err());
    }

    #[test]
    fn upper_bound_trivial_cases() {
        let p = params();
        let g = TimeGrid::spanning(0.0, 1.0, 1000).unwrap();
        let zero = Path::zeros(g);
        let r = upper_bound_check(&zero, &zero, &p).unwrap();
        assert!(r.ok && r.max_excess == 0.0);

        let q = ModelParams::zero_drift(-0.2, 0.3, 0.3).unwrap();
        let w = crate::fbm::sample_brownian(g, &mut rng_from_seed(6));
        let x = crate::sde::integrate(&q, &w, 0.0, crate::sde::Scheme::FlowSplitting).unwrap();
        assert!(upper_bound_check(&x, &w, &q).unwrap().max_excess <= 1e-12);
        let other = Path::zeros(TimeGrid::spanning(0.0, 1.0, 999).unwrap());
        assert!(matches!(upper_bound_check(&x, &other, &q), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn ladder_values() {
        assert_eq!(geometric_ladder(2.0, 3).unwrap(), vec![2.0, 6.0, 14.0]);
        assert!(geometric_ladder(2.0, 0).unwrap().is_empty());
        assert!(geometric_ladder(1.0, 3).is_err());
        let q: f64 = 1.3;
        let t = geometric_ladder(q, 12).unwrap();
        for k in 0..11 {
            let gap = t[k + 1] - t[k];
            assert!((gap - q.powi(k as i32 + 2)).abs() < 1e-12 * gap);
        }
    }

    #[test]
    fn holder_ladder_cases() {
        let g = TimeGrid::new(0.0, 0.01, 2000).unwrap();
        let zero = Path::zeros(g);
        assert_eq!(holder_ladder_check(&zero, 2.0, 1.5, 0.5, 0.5, 0.05, 3).unwrap(), LadderIndex::Infinite);
        let jump = Path::from_fn(g, |t| if t >= 7.0 { 1e3 } else { 0.0 }).unwrap();
        assert_eq!(holder_ladder_check(&jump, 2.0, 1.5, 0.5, 0.5, 0.05, 3).unwrap(), LadderIndex::Finite(2));
        assert!(holder_ladder_check(&zero, 2.0, 1.5, 0.5, 0.5, 0.05, 5).is_err());
    }
}
