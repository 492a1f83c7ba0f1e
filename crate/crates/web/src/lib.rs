//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string; the `*_json` functions hold the logic and are what native tests call.

use serde_json::json;
use wasm_bindgen::prelude::*;
use zeronoise::constants::{self, Stage2Inputs};
use zeronoise::experiment::{run_batch, summarize, ExperimentConfig, SCHEMA_VERSION};
use zeronoise::flow::{extremal_solution, transition_point, ModelParams, Sign};
use zeronoise::sde::{integrate, Scheme};
use zeronoise::selection::{MarginMode, SelectionConfig, SelectionDetector};
use zeronoise::seed::path_rng;
use zeronoise::{FbmGenerator, TimeGrid};

/// Horizon of every demo run, in units of `t_ε`.
pub const HORIZON_TEPS: f64 = 20.0;
/// Steps per unit of `t_ε`.
pub const STEPS_PER_TEPS: usize = 200;
const PLOT_POINTS: usize = 400;
const MAX_PATHS: usize = 50;
const MAX_BATCH: usize = 5000;
const ALPHA: f64 = 1.2;

fn params(gamma: f64, hurst: f64, epsilon: f64) -> Result<ModelParams, String> {
    ModelParams::new(gamma, hurst, 1.0, 1.0, epsilon).map_err(|e| e.to_string())
}

fn demo_grid(p: &ModelParams) -> Result<TimeGrid, String> {
    let tp = transition_point(p);
    let n = (HORIZON_TEPS as usize) * STEPS_PER_TEPS;
    TimeGrid::new(0.0, tp.t_eps / STEPS_PER_TEPS as f64, n).map_err(|e| e.to_string())
}

/// A few solution paths on `[0, 20 t_ε]` in rescaled units `(t/t_ε, X/x_ε)`,
/// with the two extremal solutions and each path's detected selection.
pub fn paths_json(gamma: f64, hurst: f64, epsilon: f64, n_paths: usize, seed: u64) -> Result<String, String> {
    if n_paths == 0 || n_paths > MAX_PATHS {
        return Err(format!("number of paths must be in 1..={MAX_PATHS}"));
    }
    let p = params(gamma, hurst, epsilon)?;
    if gamma <= -1.0 {
        return Err("the demo needs γ > −1".into());
    }
    let tp = transition_point(&p);
    let grid = demo_grid(&p)?;
    let gen = FbmGenerator::new(grid, hurst).map_err(|e| e.to_string())?;
    let detector =
        SelectionDetector::new(&p, &SelectionConfig::new(ALPHA, MarginMode::Paper), &grid).map_err(|e| e.to_string())?;
    let stride = (grid.n() / PLOT_POINTS).max(1);
    let nodes: Vec<usize> = (0..=grid.n()).step_by(stride).collect();
    let t: Vec<f64> = nodes.iter().map(|&k| grid.time(k) / tp.t_eps).collect();

    let mut paths = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let noise = gen.sample(&mut path_rng(seed, 0, i as u64));
        let x = integrate(&p, &noise, 0.0, Scheme::FlowSplitting).map_err(|e| e.to_string())?;
        let outcome = detector.detect(&x).map_err(|e| e.to_string())?;
        let values: Vec<f64> = nodes.iter().map(|&k| x.values()[k] / tp.x_eps).collect();
        paths.push(json!({
            "x": values,
            "sign": outcome.sign.label(),
            "psi_teps": outcome.psi_hat.map(|s| s / tp.t_eps),
        }));
    }
    let extremal = |sign: Sign| -> Result<Vec<f64>, String> {
        nodes
            .iter()
            .map(|&k| extremal_solution(grid.time(k), sign, &p).map(|v| v / tp.x_eps))
            .collect::<zeronoise::Result<_>>()
            .map_err(|e| e.to_string())
    };
    Ok(json!({
        "t_eps": tp.t_eps,
        "x_eps": tp.x_eps,
        "t": t,
        "paths": paths,
        "upper": extremal(Sign::Plus)?,
        "lower": extremal(Sign::Minus)?,
    })
    .to_string())
}

/// Selection law from a batch: probabilities, `ψ̂/t_ε` quantiles and a
/// histogram of `ψ̂/t_ε` over decided paths.
pub fn selection_json(gamma: f64, hurst: f64, epsilon: f64, n_paths: usize, seed: u64) -> Result<String, String> {
    if n_paths == 0 || n_paths > MAX_BATCH {
        return Err(format!("number of paths must be in 1..={MAX_BATCH}"));
    }
    let cfg = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        model: params(gamma, hurst, epsilon)?,
        epsilons: vec![],
        n_paths,
        seed,
        horizon_teps: HORIZON_TEPS,
        dt_teps: 1.0 / STEPS_PER_TEPS as f64,
        scheme: Scheme::FlowSplitting,
        alpha: ALPHA,
        margin: MarginMode::Paper,
        min_hold_teps: 1.0,
        x0: 0.0,
    };
    let batch = run_batch(&cfg, epsilon, 0, false).map_err(|e| e.to_string())?;
    let summary = summarize(&batch);
    let t_eps = batch.transition.t_eps;
    let psi: Vec<f64> = batch.records.iter().filter_map(|r| r.outcome.psi_hat).map(|s| s / t_eps).collect();
    let bins = 20;
    let width = HORIZON_TEPS / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &psi {
        counts[((v / width) as usize).min(bins - 1)] += 1;
    }
    Ok(json!({
        "summary": summary,
        "histogram": {"bin_width": width, "counts": counts},
    })
    .to_string())
}

/// Solved and verified constants, or the reason the tuple is infeasible.
/// Infeasibility is a normal answer here, not an error.
pub fn constants_json(gamma: f64, hurst: f64, alpha: f64, kappa: f64) -> String {
    match constants::solve(gamma, hurst, alpha, kappa, &Stage2Inputs::default()) {
        Ok(ledger) => {
            let report = constants::verify_ledger(&ledger, gamma, hurst);
            json!({"ok": report.ok, "table": report.table(), "notes": report.notes, "ledger": ledger})
        }
        Err(e) => {
            let bound = constants::kappa_max(gamma, hurst, &Stage2Inputs::default()).ok();
            json!({"ok": false, "error": e.to_string(), "kappa_max": bound})
        }
    }
    .to_string()
}

#[wasm_bindgen]
pub fn demo_paths(gamma: f64, hurst: f64, epsilon: f64, n_paths: u32, seed: u32) -> Result<String, JsError> {
    paths_json(gamma, hurst, epsilon, n_paths as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn demo_selection(gamma: f64, hurst: f64, epsilon: f64, n_paths: u32, seed: u32) -> Result<String, JsError> {
    selection_json(gamma, hurst, epsilon, n_paths as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn demo_constants(gamma: f64, hurst: f64, alpha: f64, kappa: f64) -> String {
    constants_json(gamma, hurst, alpha, kappa)
}
