//! Monte Carlo and property checks that need many sampled paths.

use zeronoise::flow::ModelParams;
use zeronoise::norms::norm_m;
use zeronoise::sde::scaling_check;
use zeronoise::seed::{path_rng, rng_from_seed};
use zeronoise::selection::{holder_ladder_check, LadderIndex};
use zeronoise::stats::ks_two_sample;
use zeronoise::volterra::{long_term_bound_constant, riemann_liouville_lagged};
use zeronoise::{sample_brownian, FbmGenerator, TimeGrid};

#[test]
fn fbm_terminal_variance_is_one() {
    let grid = TimeGrid::spanning(0.0, 1.0, 256).unwrap();
    let gen = FbmGenerator::new(grid, 0.7).unwrap();
    let mut rng = rng_from_seed(11);
    let n = 100_000;
    let var = (0..n).map(|_| gen.sample(&mut rng).values()[256].powi(2)).sum::<f64>() / n as f64;
    let se = (2.0 / n as f64).sqrt();
    assert!((var - 1.0).abs() < 3.0 * se, "Var(W_1) = {var}, se {se}");
}

#[test]
fn long_term_bound_holds_on_sampled_paths() {
    let (s, t, delta) = (0.0, 4.0, 0.1);
    let grid = TimeGrid::spanning(s, t, 256).unwrap();
    let lags = [0.0, 0.1, 0.25, 0.5, 1.0];
    for hurst in [0.3, 0.7] {
        let c_h = long_term_bound_constant(hurst, delta).unwrap();
        let mut tightest = 0.0_f64;
        for i in 0..1000 {
            let b = sample_brownian(grid, &mut path_rng(12, 0, i));
            let rhs = c_h * (1.0 + t - s).powf(2.0 * delta) * norm_m(&b, s, t, delta).unwrap();
            let mut lhs = 0.0_f64;
            for end in (1..=256).step_by(3) {
                let v = grid.time(end);
                for &u in &lags {
                    let integral = riemann_liouville_lagged(&b, 0, end, u, hurst).unwrap();
                    lhs = lhs.max(integral.abs() / (1.0 + v - s).powf(hurst + delta));
                }
            }
            assert!(lhs <= rhs, "path {i}, H = {hurst}: {lhs} > {rhs}");
            tightest = tightest.max(lhs / rhs);
        }
        assert!(tightest > 0.0);
    }
}

#[test]
fn norm_m_is_scale_invariant_in_law() {
    let delta = 0.1;
    let short = TimeGrid::spanning(0.0, 1.0, 128).unwrap();
    let long = TimeGrid::spanning(0.0, 4.0, 128).unwrap();
    let n = 10_000;
    let a: Vec<f64> =
        (0..n).map(|i| norm_m(&sample_brownian(short, &mut path_rng(13, 0, i)), 0.0, 1.0, delta).unwrap()).collect();
    let b: Vec<f64> =
        (0..n).map(|i| norm_m(&sample_brownian(long, &mut path_rng(13, 1, i)), 0.0, 4.0, delta).unwrap()).collect();
    let (d, p) = ks_two_sample(&a, &b);
    assert!(d < 0.02 && p > 1e-3, "KS {d}, p {p}");
}

#[test]
fn ks_distance_shrinks_like_inverse_root_n() {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0, 0.1).unwrap();
    let unit = TimeGrid::spanning(0.0, 1.0, 100).unwrap();
    let mean_d = |n: usize| {
        let reps = 24;
        (0..reps).map(|r| scaling_check(&p, n, unit, &[1.0], 1000 + r).unwrap().probes[0].ks_distance).sum::<f64>()
            / reps as f64
    };
    let ratio = mean_d(1600) / mean_d(800);
    assert!((ratio - 0.5f64.sqrt()).abs() < 0.15, "ratio {ratio}");
}

#[test]
fn ladder_never_exceeded_with_positive_frequency() {
    let alpha: f64 = 1.2;
    let q = 2f64.powf(1.0 / alpha);
    let k_max = 20;
    let span = (1..=k_max).map(|j| q.powi(j as i32)).sum::<f64>();
    // Unit steps: the Hölder norm is over nodes, so the resolution is part
    // of the statistic.
    let grid = TimeGrid::new(0.0, 1.0, span.ceil() as usize).unwrap();
    let infinite = (0..1000)
        .filter(|&i| {
            let b = sample_brownian(grid, &mut path_rng(14, 0, i));
            holder_ladder_check(&b, q, alpha, 0.5, 0.5, 0.1, k_max).unwrap() == LadderIndex::Infinite
        })
        .count();
    assert!(infinite > 0);
}
