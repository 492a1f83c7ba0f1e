//! Seeded Monte Carlo batches: configuration, per-path outcomes, summaries
//! and the reproducibility manifest. Nothing here touches the filesystem.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fbm::{FbmGenerator, EXACT_CAP};
use crate::flow::{transition_point, ModelParams, TransitionPoint};
use crate::grid::{Path, TimeGrid};
use crate::parallel::map_indices;
use crate::sde::{integrate, Scheme};
use crate::seed::{derive_seed, rng_from_seed};
use crate::selection::{
    estimate_probs, tail_fit, MarginMode, ProbEstimate, Selected,
    SelectionDetector, SelectionOutcome, MIN_HORIZON_TEPS, TAIL_MIN_SAMPLES,
};
use crate::stats::quantile_sorted;

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_horizon() -> f64 {
    50.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_scheme() -> Scheme {
    Scheme::FlowSplitting
}
fn default_alpha() -> f64 {
    1.2
}
fn default_margin() -> MarginMode {
    MarginMode::Paper
}
fn default_hold() -> f64 {
    1.0
}

/// One experiment. Omitted optional fields take the defaults below; the
/// manifest always records the fully resolved document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub model: ModelParams,
    /// Noise levels for a sweep; `model.epsilon` is used by `simulate`.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    /// Simulation horizon in units of `t_ε` (default 50).
    #[serde(default = "default_horizon")]
    pub horizon_teps: f64,
    /// Step in units of `t_ε` (default 1e-3).
    #[serde(default = "default_dt")]
    pub dt_teps: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_margin")]
    pub margin: MarginMode,
    #[serde(default = "default_hold")]
    pub min_hold_teps: f64,
    #[serde(default)]
    pub x0: f64,
}

fn field(path: &str, reason: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), reason: reason.into() }
}

impl ExperimentConfig {
    /// Parses a config document, or the `config` member of a manifest.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| field("", e.to_string()))?;
        let recorded_hash = match value.get("config_hash") {
            Some(h) => {
                let h = h.as_str().ok_or_else(|| field("config_hash", "must be a string"))?.to_string();
                value = value
                    .get_mut("config")
                    .map(serde_json::Value::take)
                    .ok_or_else(|| field("config", "manifest has no config member"))?;
                Some(h)
            }
            None => None,
        };
        let cfg: Self = serde_path_to_error::deserialize(value)
            .map_err(|e| field(&e.path().to_string(), e.inner().to_string()))?;
        cfg.validate()?;
        if let Some(h) = recorded_hash {
            if h != cfg.hash() {
                return Err(field("config_hash", "does not match the recorded config"));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.model.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => field(&format!("model.{name}"), reason),
            other => other,
        })?;
        if !(self.model.gamma > -1.0) {
            return Err(field("model.gamma", "simulation needs γ > −1"));
        }
        for (i, &e) in self.epsilons.iter().enumerate() {
            if !(e > 0.0 && e.is_finite()) {
                return Err(field(&format!("epsilons[{i}]"), format!("must be positive, got {e}")));
            }
        }
        if self.n_paths == 0 {
            return Err(field("n_paths", "must be at least 1"));
        }
        if !(self.horizon_teps >= MIN_HORIZON_TEPS) {
            return Err(field("horizon_teps", format!("must be at least {MIN_HORIZON_TEPS}")));
        }
        if !(self.dt_teps > 0.0 && self.dt_teps.is_finite()) {
            return Err(field("dt_teps", "must be positive"));
        }
        let steps = self.steps();
        if steps > EXACT_CAP {
            return Err(field("dt_teps", format!("{steps} steps exceed the fBm cap {EXACT_CAP}")));
        }
        let ceiling = 1.0 / (1.0 - self.model.gamma);
        if !(self.alpha > 0.0 && self.alpha < ceiling) {
            return Err(field("alpha", format!("must lie in (0, 1/(1−γ) = {ceiling})")));
        }
        if let MarginMode::Relative { delta } = self.margin {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(field("margin.delta", "must lie in (0, 1)"));
            }
        }
        if !(self.min_hold_teps > 0.0 && self.min_hold_teps < self.horizon_teps) {
            return Err(field("min_hold_teps", "must lie in (0, horizon_teps)"));
        }
        if !self.x0.is_finite() {
            return Err(field("x0", "must be finite"));
        }
        Ok(())
    }

    /// Number of grid steps.
    pub fn steps(&self) -> usize {
        (self.horizon_teps / self.dt_teps).round().max(1.0) as usize
    }

    pub fn selection(&self) -> crate::selection::SelectionConfig {
        crate::selection::SelectionConfig { alpha: self.alpha, margin: self.margin, min_hold_teps: self.min_hold_teps }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_id: usize,
    pub seed: u64,
    pub outcome: SelectionOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub epsilon: f64,
    pub transition: TransitionPoint,
    pub records: Vec<PathRecord>,
    /// Solution paths, when requested.
    pub paths: Option<Vec<Path>>,
}

/// Simulates `cfg.n_paths` solutions at noise level `epsilon`; path `i`
/// draws from `derive_seed(cfg.seed, stream, i)`.
pub fn run_batch(cfg: &ExperimentConfig, epsilon: f64, stream: u64, keep_paths: bool) -> Result<BatchResult> {
    cfg.validate()?;
    let params = cfg.model.with_epsilon(epsilon)?;
    let tp = transition_point(&params);
    let grid = TimeGrid::new(0.0, cfg.dt_teps * tp.t_eps, cfg.steps())?;
    let generator = FbmGenerator::new(grid, params.hurst)?;
    let detector = SelectionDetector::new(&params, &cfg.selection(), &grid)?;
    let runs = map_indices(cfg.n_paths, |i| -> Result<(PathRecord, Option<Path>)> {
        let seed = derive_seed(cfg.seed, stream, i as u64);
        let noise = generator.sample(&mut rng_from_seed(seed));
        let x = integrate(&params, &noise, cfg.x0, cfg.scheme)?;
        let outcome = detector.detect(&x)?;
        Ok((PathRecord { path_id: i, seed, outcome }, keep_paths.then_some(x)))
    });
    let mut records = Vec::with_capacity(cfg.n_paths);
    let mut paths = keep_paths.then(|| Vec::with_capacity(cfg.n_paths));
    for run in runs {
        let (record, path) = run?;
        records.push(record);
        if let (Some(all), Some(p)) = (paths.as_mut(), path) {
            all.push(p);
        }
    }
    Ok(BatchResult { epsilon, transition: tp, records, paths })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiQuantiles {
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationStats {
    pub paths_with_violations: usize,
    pub mean_violations: f64,
    pub max_deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub epsilon: f64,
    pub t_eps: f64,
    pub x_eps: f64,
    pub n_paths: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_undecided: usize,
    pub p_plus: f64,
    pub p_minus: f64,
    pub undecided: f64,
    pub decided_fraction: f64,
    /// Wilson intervals, present once at least 100 paths are decided.
    pub intervals: Option<ProbEstimate>,
    /// Quantiles of `ψ̂/t_ε` over decided paths.
    pub psi_teps: Option<PsiQuantiles>,
    pub kappa_hat: Option<f64>,
    pub tail_r_squared: Option<f64>,
    pub violations: ViolationStats,
}

pub fn summarize(batch: &BatchResult) -> BatchSummary {
    let n = batch.records.len();
    let count = |s: Selected| batch.records.iter().filter(|r| r.outcome.sign == s).count();
    let (n_plus, n_minus, n_undecided) = (count(Selected::Plus), count(Selected::Minus), count(Selected::Undecided));
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let signs: Vec<Selected> = batch.records.iter().map(|r| r.outcome.sign).collect();
    let t_eps = batch.transition.t_eps;
    let mut psi: Vec<f64> = batch.records.iter().filter_map(|r| r.outcome.psi_hat).map(|p| p / t_eps).collect();
    psi.sort_by(f64::total_cmp);
    let psi_teps = (!psi.is_empty()).then(|| PsiQuantiles {
        q10: quantile_sorted(&psi, 0.1),
        q25: quantile_sorted(&psi, 0.25),
        median: quantile_sorted(&psi, 0.5),
        q75: quantile_sorted(&psi, 0.75),
        q90: quantile_sorted(&psi, 0.9),
    });
    let fit = (psi.len() >= TAIL_MIN_SAMPLES).then(|| tail_fit(&psi, 1.0, None).ok()).flatten();
    let with_violations = batch.records.iter().filter(|r| r.outcome.n_violations > 0).count();
    let total_violations: usize = batch.records.iter().map(|r| r.outcome.n_violations).sum();
    BatchSummary {
        epsilon: batch.epsilon,
        t_eps,
        x_eps: batch.transition.x_eps,
        n_paths: n,
        n_plus,
        n_minus,
        n_undecided,
        p_plus: frac(n_plus),
        p_minus: frac(n_minus),
        undecided: frac(n_undecided),
        decided_fraction: frac(n_plus + n_minus),
        intervals: estimate_probs(&signs).ok(),
        psi_teps,
        kappa_hat: fit.as_ref().map(|f| f.kappa_hat),
        tail_r_squared: fit.as_ref().map(|f| f.r_squared),
        violations: ViolationStats {
            paths_with_violations: with_violations,
            mean_violations: if n == 0 { 0.0 } else { total_violations as f64 / n as f64 },
            max_deficit: batch.records.iter().map(|r| r.outcome.max_deficit).fold(0.0, f64::max),
        },
    }
}

/// One batch per entry of `cfg.epsilons`, batch `j` on seed stream `j`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<BatchSummary>> {
    if cfg.epsilons.len() < 2 {
        return Err(field("epsilons", "a sweep needs at least two noise levels"));
    }
    cfg.epsilons
        .iter()
        .enumerate()
        .map(|(j, &e)| run_batch(cfg, e, j as u64, false).map(|b| summarize(&b)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Whether raw solution paths were written alongside the outcomes.
    #[serde(default)]
    pub save_paths: bool,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: "zeronoise".into(),
            version: VERSION.into(),
            command: command.into(),
            config_hash: config.hash(),
            config: config.clone(),
            save_paths: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config = ExperimentConfig::from_json(text)?;
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| field("", e.to_string()))?;
        let text_field = |name: &str| value.get(name).and_then(|v| v.as_str()).map(str::to_string);
        let (Some(tool), Some(version), Some(command)) = (text_field("tool"), text_field("version"), text_field("command")) else {
            return Err(field("", "not a manifest: needs tool, version, command and config_hash"));
        };
        Ok(Self {
            tool,
            version,
            command,
            config_hash: config.hash(),
            save_paths: value.get("save_paths").and_then(|v| v.as_bool()).unwrap_or(false),
            config,
        })
    }
}

pub const OUTCOMES_HEADER: &str = "path_id,seed,sign,psi_hat,n_violations,max_excess";

/// One outcomes CSV line (no trailing newline); undecided paths leave
/// `psi_hat` empty.
pub fn outcome_row(r: &PathRecord) -> String {
    let psi = r.outcome.psi_hat.map(|p| p.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{}",
        r.path_id,
        r.seed,
        r.outcome.sign.label(),
        psi,
        r.outcome.n_violations,
        r.outcome.max_deficit
    )
}

pub const SWEEP_HEADER: &str = "epsilon,t_eps,x_eps,p_plus,p_minus,undecided,decided_fraction,psi_q10,psi_q25,psi_median,psi_q75,psi_q90,kappa_hat";

pub fn sweep_row(s: &BatchSummary) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let q = s.psi_teps.as_ref();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.epsilon,
        s.t_eps,
        s.x_eps,
        s.p_plus,
        s.p_minus,
        s.undecided,
        s.decided_fraction,
        opt(q.map(|q| q.q10)),
        opt(q.map(|q| q.q25)),
        opt(q.map(|q| q.median)),
        opt(q.map(|q| q.q75)),
        opt(q.map(|q| q.q90)),
        opt(s.kappa_hat)
    )
}
