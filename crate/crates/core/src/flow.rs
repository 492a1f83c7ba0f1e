//! Deterministic algebra of the power-law drift and its flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::pow0;

/// Problem instance `(γ, H, A⁺, A⁻, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub hurst: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, hurst: f64, a_plus: f64, a_minus: f64, epsilon: f64) -> Result<Self> {
        let p = Self { gamma, hurst, a_plus, a_minus, epsilon };
        p.validate()?;
        Ok(p)
    }

    /// Drift switched off (`A⁺ = A⁻ = 0`). Only meant for tests and
    /// diagnostics that need the pure-noise dynamics.
    pub fn zero_drift(gamma: f64, hurst: f64, epsilon: f64) -> Result<Self> {
        let p = Self { gamma, hurst, a_plus: 0.0, a_minus: 0.0, epsilon };
        p.validate_shape()?;
        Ok(p)
    }

    fn validate_shape(&self) -> Result<()> {
        let Self { gamma, hurst, epsilon, .. } = *self;
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::param("hurst", format!("must lie in (0, 1), got {hurst}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
        }
        if !(gamma < 1.0) {
            return Err(Error::param("gamma", format!("must be below 1, got {gamma}")));
        }
        let floor = 1.0 - 1.0 / (2.0 * hurst);
        if !(gamma > floor) {
            return Err(Error::param("gamma", format!("must exceed 1 − 1/(2H) = {floor}, got {gamma}")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        for (name, a) in [("a_plus", self.a_plus), ("a_minus", self.a_minus)] {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {a}")));
            }
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let p = Self { epsilon, ..*self };
        p.validate_shape()?;
        Ok(p)
    }

    pub fn amplitude(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.a_plus,
            Sign::Minus => self.a_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Option<Sign> {
        if x > 0.0 {
            Some(Sign::Plus)
        } else if x < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `b(x) = A⁺ x^γ` for `x > 0`, `−A⁻ |x|^γ` for `x < 0`.
pub fn drift(x: f64, p: &ModelParams) -> Result<f64> {
    if x == 0.0 {
        return if p.gamma > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!("drift is singular at 0 for γ = {}", p.gamma)))
        };
    }
    let mag = x.abs().powf(p.gamma);
    Ok(if x > 0.0 { p.a_plus * mag } else { -p.a_minus * mag })
}

/// Semi-flow of `ẋ = x^γ` without argument checks.
#[inline]
pub(crate) fn phi(x: f64, t: f64, gamma: f64) -> f64 {
    let e = 1.0 - gamma;
    pow0(pow0(x, e) + e * t, 1.0 / e)
}

/// `φ(x, t) = (x^{1−γ} + (1−γ) t)^{1/(1−γ)}`, the semi-flow of `ẋ = x^γ`.
///
/// The flow of `ẋ = A x^γ` is `φ(x, A t)`.
pub fn flow_phi(x: f64, t: f64, gamma: f64) -> Result<f64> {
    if !(gamma < 1.0) {
        return Err(Error::Domain(format!("flow needs γ < 1, got {gamma}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("flow needs x >= 0, got {x}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("flow needs t >= 0, got {t}")));
    }
    Ok(phi(x, t, gamma))
}

/// `x^{±,0}_t = ±φ(0, A^± t)`.
pub fn extremal_solution(t: f64, sign: Sign, p: &ModelParams) -> Result<f64> {
    Ok(sign.factor() * flow_phi(0.0, p.amplitude(sign) * t, p.gamma)?)
}

/// Scale at which noise `ε t^H` and drift displacement `t^{1/(1−γ)}` balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub t_eps: f64,
    pub x_eps: f64,
}

pub fn transition_point(p: &ModelParams) -> TransitionPoint {
    let e = 1.0 - p.gamma;
    let t_eps = p.epsilon.powf(e / (1.0 - p.hurst * e));
    TransitionPoint { t_eps, x_eps: p.epsilon * t_eps.powf(p.hurst) }
}

/// Monotonicity class of the drift on the positive half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftClass {
    /// `γ < 0`: the drift decreases in `x`.
    Decreasing,
    /// `γ > 0`: the drift increases in `x`.
    Increasing,
}

impl DriftClass {
    pub fn of(gamma: f64) -> DriftClass {
        if gamma < 0.0 {
            DriftClass::Decreasing
        } else {
            DriftClass::Increasing
        }
    }
}

/// Bounds at elapsed time `h` on `x_t = x_s + ∫_s^t A⁺ x_r^γ dr + w_t` for
/// any perturbation with `w_s = 0` and `|w| <= w̄`.
///
/// Decreasing class: `[φ(x+w̄, A h) − 2w̄, φ(x−w̄, A h) + 2w̄]`.
/// Increasing class: `[φ(x−w̄, A h), φ(x+w̄, A h)]`.
pub fn comparison_envelope(
    x_s: f64,
    w_bar: f64,
    h: f64,
    p: &ModelParams,
    class: DriftClass,
) -> Result<(f64, f64)> {
    if !(w_bar >= 0.0) {
        return Err(Error::Domain(format!("w̄ must be >= 0, got {w_bar}")));
    }
    if !(x_s - w_bar > 0.0) {
        return Err(Error::Domain(format!(
            "envelope invalid: x_s − w̄ = {} is not positive",
            x_s - w_bar
        )));
    }
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("elapsed time must be >= 0, got {h}")));
    }
    let at = p.a_plus * h;
    let g = p.gamma;
    Ok(match class {
        DriftClass::Decreasing => (
            phi(x_s + w_bar, at, g) - 2.0 * w_bar,
            phi(x_s - w_bar, at, g) + 2.0 * w_bar,
        ),
        DriftClass::Increasing => (phi(x_s - w_bar, at, g), phi(x_s + w_bar, at, g)),
    })
}

/// Maximizer `t₀` and maximum of `h(t) = c_w t^α (M + A t)^{−1/(1−γ)}`.
pub fn max_deviation(c_w: f64, m: f64, a: f64, alpha: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma < 1.0) {
        return Err(Error::Domain(format!("need γ < 1, got {gamma}")));
    }
    let ag = alpha * (1.0 - gamma);
    if !(alpha > 0.0 && ag < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < α < 1/(1−γ) = {}, got {alpha}",
            1.0 / (1.0 - gamma)
        )));
    }
    if !(c_w > 0.0 && m > 0.0 && a > 0.0) {
        return Err(Error::Domain("c_w, M and A must be positive".into()));
    }
    let c = ag / (1.0 - ag);
    let t0 = c * m / a;
    Ok((t0, c_w * t0.powf(alpha) * (m + a * t0).powf(-1.0 / (1.0 - gamma))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(gamma: f64) -> ModelParams {
        ModelParams::new(gamma, 0.3, 1.0, 1.0, 0.1).unwrap()
    }

    fn rk4(f: impl Fn(f64, f64) -> f64, x0: f64, t1: f64, steps: usize) -> f64 {
        let h = t1 / steps as f64;
        let mut x = x0;
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = f(t, x);
            let k2 = f(t + h / 2.0, x + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, x + h / 2.0 * k2);
            let k4 = f(t + h, x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.5, 0.5, 1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, 1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 0.5, 1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(-0.7, 0.3, 1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(-0.1, 0.5, 1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(-0.5, 0.3, 1.0, 1.0, 0.1).is_ok());
        assert!(ModelParams::new(0.5, 0.5, 0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::zero_drift(0.5, 0.5, 1.0).is_ok());
    }

    #[test]
    fn drift_values_and_homogeneity() {
        let p = ModelParams::new(-0.3, 0.3, 2.0, 0.7, 0.1).unwrap();
        assert_eq!(drift(1.0, &p).unwrap(), 2.0);
        assert_eq!(drift(-1.0, &p).unwrap(), -0.7);
        assert!(drift(0.0, &p).is_err());
        assert_eq!(drift(0.0, &params(0.5)).unwrap(), 0.0);
        for &x in &[0.3, -2.5, 7.0] {
            for &l in &[0.01, 1.7, 40.0] {
                let lhs = drift(l * x, &p).unwrap();
                let rhs = l.powf(p.gamma) * drift(x, &p).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn flow_basic_values() {
        assert_eq!(flow_phi(2.3, 0.0, -0.4).unwrap(), 2.3);
        assert_relative_eq!(flow_phi(1.5, 2.0, 0.0).unwrap(), 3.5, max_relative = 1e-15);
        assert!(flow_phi(1.0, 1.0, 1.0).is_err());
        assert!(flow_phi(-1.0, 1.0, 0.5).is_err());

        let closed = flow_phi(0.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(closed, 0.25, max_relative = 1e-15);
        let oracle = rk4(|_, x: f64| x.sqrt(), 1e-12, 1.0, 100_000);
        assert!((oracle - closed).abs() < 1e-5, "{oracle}");
    }

    #[test]
    fn extremals() {
        let p = params(0.5);
        assert_eq!(extremal_solution(0.0, Sign::Plus, &p).unwrap(), 0.0);
        assert_relative_eq!(extremal_solution(2.0, Sign::Plus, &p).unwrap(), 1.0, max_relative = 1e-15);
        let oracle = rk4(|_, x: f64| x.sqrt(), 1e-12, 2.0, 100_000);
        assert!((oracle - 1.0).abs() < 1e-5);
        for t in [0.1, 1.0, 3.0] {
            assert_eq!(
                extremal_solution(t, Sign::Minus, &p).unwrap(),
                -extremal_solution(t, Sign::Plus, &p).unwrap()
            );
        }
    }

    #[test]
    fn transition_point_values() {
        let tp = transition_point(&ModelParams::new(0.5, 0.5, 1.0, 1.0, 1e-3).unwrap());
        assert_relative_eq!(tp.t_eps, 1e-2, max_relative = 1e-12);
        assert_relative_eq!(tp.x_eps, 1e-4, max_relative = 1e-12);
        let one = transition_point(&ModelParams::new(-0.2, 0.4, 1.0, 1.0, 1.0).unwrap());
        assert_eq!((one.t_eps, one.x_eps), (1.0, 1.0));
    }

    #[test]
    fn envelope_special_cases() {
        let p = params(-0.5);
        let (lo, hi) = comparison_envelope(2.0, 0.0, 1.3, &p, DriftClass::Decreasing).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo, flow_phi(2.0, 1.3, -0.5).unwrap());
        let (lo, hi) = comparison_envelope(2.0, 0.1, 0.0, &p, DriftClass::Decreasing).unwrap();
        assert_relative_eq!(lo, 1.9, max_relative = 1e-14);
        assert_relative_eq!(hi, 2.1, max_relative = 1e-14);
        assert!(comparison_envelope(0.1, 0.1, 1.0, &p, DriftClass::Decreasing).is_err());
    }

    #[test]
    fn envelope_contains_perturbed_solutions() {
        use rand::Rng;
        let mut rng = crate::seed::rng_from_seed(1);
        for (gamma, class) in [(-0.5, DriftClass::Decreasing), (0.5, DriftClass::Increasing)] {
            let p = params(gamma);
            let (x_s, w_bar, h) = (2.0, 0.1, 1.0);
            for _ in 0..50 {
                let amps: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
                let total: f64 = amps.iter().map(|a: &f64| a.abs()).sum();
                let w = |t: f64| {
                    amps.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * 3.0 * t).sin()).sum::<f64>()
                        * w_bar
                        / total
                };
                // z = x − w solves ż = A (z + w)^γ.
                let z = rk4(|t, z| p.a_plus * (z + w(t)).powf(gamma), x_s, h, 2000);
                let x = z + w(h);
                let (lo, hi) = comparison_envelope(x_s, w_bar, h, &p, class).unwrap();
                assert!(lo - 1e-9 <= x && x <= hi + 1e-9, "γ={gamma}: {lo} {x} {hi}");
            }
        }
    }

    #[test]
    fn max_deviation_closed_form() {
        let (t0, _) = max_deviation(1.0, 3.0, 2.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(t0, 1.5, max_relative = 1e-15);
        assert!(max_deviation(1.0, 1.0, 1.0, 2.0, 0.5).is_err());

        let (c_w, m, a, alpha, gamma) = (0.7, 2.0, 3.0, 0.8, 0.2);
        let (t0, hmax) = max_deviation(c_w, m, a, alpha, gamma).unwrap();
        let h = |t: f64| c_w * t.powf(alpha) * (m + a * t).powf(-1.0 / (1.0 - gamma));
        let n = 200_000;
        let best = (0..=n)
            .map(|i| h(t0 / 100.0 * (1e4f64).powf(i as f64 / n as f64)))
            .fold(0.0, f64::max);
        assert_relative_eq!(hmax, best, max_relative = 1e-6);
        let (t1, h1) = max_deviation(2.0 * c_w, m, a, alpha, gamma).unwrap();
        assert_eq!(t1, t0);
        assert_relative_eq!(h1, 2.0 * hmax, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn semigroup(x in 0.0f64..10.0, s in 0.0f64..5.0, t in 0.0f64..5.0, g in -0.99f64..0.99) {
            let lhs = flow_phi(x, s + t, g).unwrap();
            let rhs = flow_phi(flow_phi(x, s, g).unwrap(), t, g).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300));
        }

        #[test]
        fn transpoint_identities(g in -0.9f64..0.95, h in 0.05f64..0.95, e in 1e-4f64..1.0) {
            prop_assume!(g > 1.0 - 1.0 / (2.0 * h));
            let tp = transition_point(&ModelParams::new(g, h, 1.0, 1.0, e).unwrap());
            let other = tp.t_eps.powf(1.0 / (1.0 - g));
            prop_assert!((tp.x_eps - other).abs() <= 1e-12 * other);
            prop_assert!((tp.t_eps * tp.x_eps.powf(g - 1.0) - 1.0).abs() <= 1e-12);
        }
    }
}
