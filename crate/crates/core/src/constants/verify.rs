//! Direct evaluation of every relation. Nothing here is shared with the
//! solver; each formula is written out again from the displayed relation.

use super::{ConstantsLedger, Flag, FlagReport};

pub const C_G_SIGN_NOTE: &str = "the Girsanov relation is evaluated as displayed, \
with C_G entering negatively; the escape-event estimate it feeds uses the opposite \
sign convention, so the flag is conditional on the displayed form";

const EQ_TOL: f64 = 1e-12;

struct Flags(Vec<Flag>);

impl Flags {
    fn push(&mut self, name: &str, ok: bool, slack: f64) {
        self.0.push(Flag { name: name.into(), ok: ok && slack.is_finite(), slack });
    }

    fn strict(&mut self, name: &str, slack: f64) {
        self.push(name, slack > 0.0, slack);
    }

    fn weak(&mut self, name: &str, slack: f64) {
        self.push(name, slack >= 0.0, slack);
    }

    fn equal(&mut self, name: &str, lhs: f64, rhs: f64) {
        let slack = EQ_TOL * lhs.abs().max(rhs.abs()).max(1.0) - (lhs - rhs).abs();
        self.weak(name, slack);
    }
}

/// Re-evaluates every relation for `ledger` at `(γ, H)`.
pub fn verify_ledger(ledger: &ConstantsLedger, gamma: f64, hurst: f64) -> FlagReport {
    let l = ledger;
    let h = hurst;
    let inp = &l.inputs;
    let mut f = Flags(Vec::new());
    let ceiling = 1.0 / (1.0 - gamma);

    f.strict("alpha_range", (l.alpha - 1.5 * l.kappa - h).min(ceiling - l.alpha));
    f.push("sigma_range", l.sigma > h && l.sigma <= 1.0, (l.sigma - h).min(1.0 - l.sigma));
    f.strict("positivity", l.theta.min(l.mu_g).min(l.kappa));
    let gap = l.sigma - h - 2.0 * l.delta;
    let fixed_one = l.xi + (1.0 / (1.0 + l.theta) + 1.0 / l.mu_g) / gap;
    f.strict("fixed_one", if gap > 0.0 { 1.0 - fixed_one } else { -1.0 });
    f.strict("fixed_two_theta", 1.0 - (1.0 + l.theta) * l.kappa);
    f.strict("fixed_two_mu", 2.0 - l.mu_g * l.kappa);
    f.equal("nu_def", l.alpha, l.sigma + l.xi * (h - l.sigma));

    f.strict("te_range", l.t_e.min(1.0 - l.t_e));
    f.strict("c_af_range", l.c_af.min(1.0 - l.c_af));
    f.strict("u_lower", l.u - 2.0);
    f.strict("vartheta_range", l.vartheta.min(2.0 - l.vartheta));
    f.weak("c_w_lower", l.c_w - 1.0);
    f.push("beta_range", l.beta > h && l.beta <= l.sigma, (l.beta - h).min(l.sigma - l.beta));
    f.strict("delta_positive", l.delta);

    // c_Af (1+t*)^σ <= (1+t*)^{H+δ}, compared in logs.
    let log1t = l.t_star.ln_1p();
    f.weak("ca_tstar_bound", (h + l.delta) * log1t - (l.c_af.ln() + l.sigma * log1t));
    let base = l.u * l.t_e.powf(-0.5 - l.delta);
    f.equal("ca_tstar_def", l.t_star.ln(), l.vartheta * base.ln());
    f.strict("ca_tstar_small", 2f64.ln() - 10.0 * l.delta / h * l.t_star.ln());

    let teu = [
        base.powf(1.0 + l.vartheta * (h - 0.5 - l.beta)),
        l.u.powf(-l.vartheta * (0.5 - 3.0 * l.delta)) * l.t_star.powf(-3.0 * l.delta * (0.5 + l.delta)),
        l.c_af,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    f.strict("teu", l.k_a / 3.0 - teu);

    let m_star = l.t_e.powf(-(0.5 + l.delta) * (1.0 + l.vartheta * (h - 0.5))) * l.u.powf(l.vartheta * (h - 0.5))
        - l.t_e.powf(h);
    f.strict("vartheta_lower", m_star - 5f64.powf(1.0 / (l.alpha * (1.0 - gamma))));

    // C_B 12 (U−1) t_e^{−1/2} e^{−t_e^{−1−2δ}} > C_G e^{−9λ t_e^{−1−2(1/2+H(γ−1))}}, in logs.
    let lhs = (12.0 * inp.c_b * (l.u - 1.0)).ln() - 0.5 * l.t_e.ln() - l.t_e.powf(-1.0 - 2.0 * l.delta);
    let rhs = inp.c_g.ln() - 9.0 * inp.lambda * l.t_e.powf(-1.0 - 2.0 * (0.5 + h * (gamma - 1.0)));
    f.strict("girsanov", lhs - rhs);

    let escape = inp.amplitude.max(1.0) * l.t_e.powf(h.min(0.5) + l.delta);
    f.weak("escape_te", 0.25f64.min(8f64.powf(-gamma)) - escape);

    let q_slack = if gamma < 0.0 {
        (l.q - 2f64.powf(1.0 / l.alpha)).min(5f64.powf(1.0 / l.alpha) - l.q)
    } else {
        (l.q - 1.0).min(1.0 + 1.0 / (2.0 * inp.k_gamma) - l.q)
    };
    f.strict("fixed_five", q_slack);

    let c_ag = l.alpha * (1.0 - gamma) / (1.0 + l.alpha * (gamma - 1.0));
    let k_of = |a: f64, x: f64| {
        l.q.powf(-l.alpha)
            * 5f64.powf(-1.0 / (l.alpha * (1.0 - gamma))).min(a.powf(l.alpha) * (x + c_ag).powf(1.0 / (1.0 - gamma)))
            / 3.0
    };
    f.equal("fixed_four", l.k_a, k_of(inp.amplitude, 1.0));
    f.strict("k_a_below_one", 1.0 - l.k_a);

    let xi2 = 1.0 / (l.mu_g * gap);
    let xi1 = 1.0 - l.xi - xi2;
    f.equal("ell_def", l.ell, xi1 * gap);
    f.strict("ell_positive", l.ell);
    f.weak("ell", l.c_af - inp.k_ell * l.c_w.powf(-l.ell));

    let flags = f.0;
    FlagReport {
        ok: flags.iter().all(|x| x.ok),
        flags,
        notes: vec![C_G_SIGN_NOTE.to_string()],
    }
}
