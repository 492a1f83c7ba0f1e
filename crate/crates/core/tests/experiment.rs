use zeronoise::experiment::{run_batch, run_sweep, summarize, ExperimentConfig, SWEEP_HEADER, sweep_row};
use zeronoise::flow::{transition_point, ModelParams};
use zeronoise::sde::{integrate, Scheme};
use zeronoise::seed::path_rng;
use zeronoise::selection::{detect_selection, MarginMode};
use zeronoise::{sample_brownian, TimeGrid};

fn config(eps: &str, n: usize) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"model": {{"gamma": 0.5, "hurst": 0.5, "a_plus": 1, "a_minus": 1, "epsilon": 0.01}},
            "epsilons": {eps}, "n_paths": {n}, "seed": 99}}"#
    ))
    .unwrap()
}

#[test]
fn nearly_every_path_is_decided() {
    let cfg = config("[]", 1000);
    let s = summarize(&run_batch(&cfg, 0.01, 0, false).unwrap());
    assert!(s.decided_fraction >= 0.99, "{}", s.decided_fraction);
    assert_eq!(s.n_plus + s.n_minus + s.n_undecided, 1000);
}

#[test]
fn sweep_rows_follow_transition_scale() {
    let cfg = config("[0.1, 0.05]", 300);
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let tp = transition_point(&cfg.model.with_epsilon(row.epsilon).unwrap());
        assert_eq!(row.t_eps, tp.t_eps);
        assert_eq!(row.x_eps, tp.x_eps);
        assert_eq!(sweep_row(row).split(',').count(), SWEEP_HEADER.split(',').count());
    }
    let (a, b) = (rows[0].psi_teps.as_ref().unwrap().median, rows[1].psi_teps.as_ref().unwrap().median);
    assert!(a / b < 3.0 && b / a < 3.0, "medians {a} and {b}");
}

#[test]
fn looser_margin_never_delays_selection() {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0, 0.1).unwrap();
    let tp = transition_point(&p);
    let grid = TimeGrid::new(0.0, tp.t_eps / 100.0, 2000).unwrap();
    for i in 0..200 {
        let w = sample_brownian(grid, &mut path_rng(5, 0, i));
        let x = integrate(&p, &w, 0.0, Scheme::FlowSplitting).unwrap();
        let mut last = f64::INFINITY;
        for delta in [0.05, 0.2, 0.5, 0.9] {
            let psi = detect_selection(&x, &p, 1.2, MarginMode::Relative { delta }).unwrap().psi_hat;
            let psi = psi.unwrap_or(f64::INFINITY);
            assert!(psi <= last, "path {i}: δ = {delta} gave {psi} after {last}");
            last = psi;
        }
    }
}
