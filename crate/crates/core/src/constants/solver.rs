//! Deterministic construction of a ledger: closed-form choices where the
//! argument gives them, bisection in `log t_e` and a shrinking loop on `δ`.

use super::{verify_ledger, ConstantsLedger, FixedConstants, Stage2Inputs};
use crate::error::{Error, Result};

fn check_open(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v > lo && v < hi {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in ({lo}, {hi}), got {v}")))
    }
}

/// First-stage constants with `σ = 1` and `1+θ = r/κ`, `μ_g = 2r/κ` for an
/// `r < 1` halfway between its lower limit and 1; `δ` is half its largest
/// admissible value.
pub fn solve_fixed(gamma: f64, hurst: f64, alpha: f64, kappa: f64) -> Result<FixedConstants> {
    check_open("hurst", hurst, 0.0, 1.0)?;
    if !(gamma < 1.0) {
        return Err(Error::param("gamma", format!("must be < 1, got {gamma}")));
    }
    if !(kappa > 0.0 && alpha.is_finite()) {
        return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
    }
    let ceiling = 1.0 / (1.0 - gamma);
    if !(1.5 * kappa + hurst < alpha && alpha < ceiling) {
        return Err(Error::Infeasible(format!(
            "precondition 3/2 κ + H < α < 1/(1−γ) fails: {} < {alpha} < {ceiling}",
            1.5 * kappa + hurst
        )));
    }
    if !(kappa < 1.0) {
        return Err(Error::Infeasible(format!("θ > 0 with (1+θ)κ < 1 needs κ < 1, got {kappa}")));
    }
    let sigma = 1.0;
    let xi = (sigma - alpha) / (sigma - hurst);
    let floor = kappa.max(1.5 * kappa / (alpha - hurst));
    let r = 0.5 * (1.0 + floor);
    let theta = r / kappa - 1.0;
    let mu_g = 2.0 * r / kappa;
    let delta_max = 0.5 * (sigma - hurst) * (1.0 - 1.5 * kappa / (r * (alpha - hurst)));
    Ok(FixedConstants { gamma, hurst, alpha, kappa, sigma, xi, theta, mu_g, delta: 0.5 * delta_max })
}

struct Search<'a> {
    f: &'a FixedConstants,
    inp: &'a Stage2Inputs,
    k_a: f64,
    delta: f64,
    vartheta: f64,
    beta: f64,
    u: f64,
}

impl Search<'_> {
    fn log_base(&self, log_te: f64) -> f64 {
        self.u.ln() - (0.5 + self.delta) * log_te
    }

    /// The `t_e`-dependent relations, in the order they are reported.
    fn te_constraints(&self, log_te: f64) -> [(&'static str, bool); 5] {
        let (h, g, d, th) = (self.f.hurst, self.f.gamma, self.delta, self.vartheta);
        let te = log_te.exp();
        let lb = self.log_base(log_te);
        let first = (lb * (1.0 + th * (h - 0.5 - self.beta))).exp();
        let m = (-(0.5 + d) * (1.0 + th * (h - 0.5)) * log_te + th * (h - 0.5) * self.u.ln()).exp() - te.powf(h);
        let threshold = 5f64.powf(1.0 / (self.f.alpha * (1.0 - g)));
        let gain = (12.0 * self.inp.c_b * (self.u - 1.0)).ln() - 0.5 * log_te - (-(1.0 + 2.0 * d) * log_te).exp();
        let loss = self.inp.c_g.ln() - 9.0 * self.inp.lambda * (-(2.0 - 2.0 * h * (1.0 - g)) * log_te).exp();
        let escape = self.inp.amplitude.max(1.0) * ((h.min(0.5) + d) * log_te).exp();
        [
            ("teu", first < self.k_a / 3.0),
            ("vartheta_lower", m > threshold),
            ("girsanov", gain > loss),
            ("escape_te", escape <= 0.25f64.min(8f64.powf(-g))),
            ("t_star_finite", th * lb < 700.0),
        ]
    }

    fn te_ok(&self, log_te: f64) -> bool {
        self.te_constraints(log_te).iter().all(|c| c.1)
    }
}

/// `q` inside the interval required for the sign of `γ`.
fn choose_q(gamma: f64, alpha: f64, k_gamma: f64) -> f64 {
    if gamma < 0.0 {
        10f64.powf(0.5 / alpha)
    } else {
        1.0 + 1.0 / (4.0 * k_gamma)
    }
}

fn k_of(a: f64, x: f64, q: f64, alpha: f64, gamma: f64) -> f64 {
    let c = alpha * (1.0 - gamma) / (1.0 - alpha * (1.0 - gamma));
    let inner = 5f64.powf(-1.0 / (alpha * (1.0 - gamma))).min(a.powf(alpha) * (x + c).powf(1.0 / (1.0 - gamma)));
    q.powf(-alpha) * inner / 3.0
}

/// Completes `fixed` into a full ledger and checks it with the verifier.
pub fn solve_stage2(fixed: &FixedConstants, inputs: &Stage2Inputs) -> Result<ConstantsLedger> {
    let inp = inputs;
    for (name, v) in [
        ("c_b", inp.c_b),
        ("c_g", inp.c_g),
        ("lambda", inp.lambda),
        ("k_ell", inp.k_ell),
        ("k_gamma", inp.k_gamma),
        ("amplitude", inp.amplitude),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
    }
    if let Some(th) = inp.vartheta {
        check_open("vartheta", th, 0.0, 2.0)?;
    }
    let (g, h, sigma) = (fixed.gamma, fixed.hurst, fixed.sigma);
    let delta_girsanov = 0.5 + h * (g - 1.0);
    if !(delta_girsanov > 0.0) {
        return Err(Error::Infeasible(format!("girsanov: needs 1/2 + H(γ−1) > 0, got {delta_girsanov}")));
    }
    let q = choose_q(g, fixed.alpha, inp.k_gamma);
    let k_a = k_of(inp.amplitude, 1.0, q, fixed.alpha, g);
    let beta = sigma;

    let mut s = Search {
        f: fixed,
        inp,
        k_a,
        delta: fixed.delta.min(0.5 * delta_girsanov).min(1.0 / 12.0),
        vartheta: 0.0,
        beta,
        u: 0.0,
    };
    let mut log_te = 0.0;
    let mut t_star = 0.0;
    let mut settled = false;
    for _ in 0..200 {
        let lo = 1.0 / (beta - h + 0.5);
        let mut hi = (1.0 / (0.5 + s.delta)).min(2.0);
        if h < 0.5 {
            hi = hi.min(1.0 / (0.5 - h));
        }
        s.vartheta = match inp.vartheta {
            Some(th) if th > lo && th < hi => th,
            Some(th) => {
                return Err(Error::Infeasible(format!(
                    "vartheta_range: ϑ = {th} must lie in ({lo}, {hi}) at δ = {}",
                    s.delta
                )))
            }
            None if lo < hi => 0.5 * (lo + hi),
            None => return Err(Error::Infeasible(format!("vartheta_range: empty interval ({lo}, {hi})"))),
        };
        s.u = (k_a / 6.0).powf(-1.0 / (s.vartheta * (0.5 - 3.0 * s.delta))).max(4.0);

        // Scan down in half-decades of e for a feasible point; every exponent
        // stays below 2, so nothing overflows above log t_e = −300.
        let Some(k) = (1..=600).find(|&k| s.te_ok(-0.5 * k as f64)) else {
            let binding: Vec<&str> =
                s.te_constraints(-300.0).iter().filter(|c| !c.1).map(|c| c.0).collect();
            return Err(Error::Infeasible(format!("no t_e found; binding: {}", binding.join(", "))));
        };
        let (mut ok, mut bad) = (-0.5 * k as f64, -0.5 * (k - 1) as f64);
        for _ in 0..60 {
            let mid = 0.5 * (ok + bad);
            if s.te_ok(mid) {
                ok = mid;
            } else {
                bad = mid;
            }
        }
        // Back off by 10% so that every relation keeps visible slack.
        log_te = if s.te_ok(ok + 0.9f64.ln()) { ok + 0.9f64.ln() } else { ok };
        let log_t_star = s.vartheta * s.log_base(log_te);
        t_star = log_t_star.exp();
        if 10.0 * s.delta / h * log_t_star < 0.99 * 2f64.ln() {
            settled = true;
            break;
        }
        s.delta = 0.5 * h * 2f64.ln() / (10.0 * log_t_star);
    }
    if !settled {
        return Err(Error::Infeasible("ca_tstar_small: δ did not settle".into()));
    }
    let delta = s.delta;
    let c_af = 0.5 * ((h + delta - sigma) * t_star.ln_1p()).exp().min(k_a / 3.0);
    let gap = sigma - h - 2.0 * delta;
    let xi2 = 1.0 / (fixed.mu_g * gap);
    let ell = (1.0 - fixed.xi - xi2) * gap;
    if !(ell > 0.0) {
        return Err(Error::Infeasible(format!("ell: exponent ℓ = {ell} is not positive")));
    }
    let c_w = (2.0 * inp.k_ell / c_af).powf(1.0 / ell).max(1.0);

    let ledger = ConstantsLedger {
        gamma: g,
        hurst: h,
        inputs: *inp,
        alpha: fixed.alpha,
        kappa: fixed.kappa,
        sigma,
        xi: fixed.xi,
        theta: fixed.theta,
        mu_g: fixed.mu_g,
        delta,
        t_e: log_te.exp(),
        c_af,
        c_ac: 1.0,
        u: s.u,
        vartheta: s.vartheta,
        c_w,
        beta,
        q,
        k_a,
        t_star,
        ell,
        flags: Vec::new(),
    };
    let report = verify_ledger(&ledger, g, h);
    if !report.ok {
        let names: Vec<&str> = report.failing().map(|f| f.name.as_str()).collect();
        return Err(Error::Infeasible(format!("binding: {}", names.join(", "))));
    }
    Ok(ConstantsLedger { flags: report.flags, ..ledger })
}

/// [`solve_fixed`] followed by [`solve_stage2`].
pub fn solve(gamma: f64, hurst: f64, alpha: f64, kappa: f64, inputs: &Stage2Inputs) -> Result<ConstantsLedger> {
    solve_stage2(&solve_fixed(gamma, hurst, alpha, kappa)?, inputs)
}

/// Largest feasible `κ` for `(γ, H)` by bisection, taking `α` at the midpoint
/// of `(3/2 κ + H, 1/(1−γ))`.
pub fn kappa_max(gamma: f64, hurst: f64, inputs: &Stage2Inputs) -> Result<f64> {
    check_open("hurst", hurst, 0.0, 1.0)?;
    let ceiling = 1.0 / (1.0 - gamma);
    let feasible = |kappa: f64| {
        let alpha = 0.5 * (1.5 * kappa + hurst + ceiling);
        solve(gamma, hurst, alpha, kappa, inputs).is_ok()
    };
    let bound = 2.0 / 3.0 * (ceiling - hurst);
    if !(bound > 0.0) || !feasible(1e-3 * bound) {
        return Err(Error::Infeasible(format!("no feasible κ for γ = {gamma}, H = {hurst}")));
    }
    let (mut lo, mut hi) = (1e-3 * bound, 1.5 * bound + 1e-3);
    if feasible(hi) {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The explicit pair `(U, t_e)` written down in the existence argument:
/// `U = (3/2)^{2/ϑ}` and
/// `t_e^{−1} = (5^{1/α} (3/2)^{1−2H})^{1/(ϑ(H+δ)(1/2+δ))} ∨ 3^{1/(ϑ(H−1/2−β)+1)}`.
pub fn proof_te_closed_form(alpha: f64, hurst: f64, delta: f64, vartheta: f64, beta: f64) -> (f64, f64) {
    let u = 1.5f64.powf(2.0 / vartheta);
    let a = (5f64.powf(1.0 / alpha) * 1.5f64.powf(1.0 - 2.0 * hurst))
        .powf(1.0 / (vartheta * (hurst + delta) * (0.5 + delta)));
    let b = 3f64.powf(1.0 / (vartheta * (hurst - 0.5 - beta) + 1.0));
    (u, 1.0 / a.max(b))
}
