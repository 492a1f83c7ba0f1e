//! Small numeric helpers shared across modules.

/// `x^p` for `x >= 0` with the conventions `0^p = 0` (p > 0), `0^0 = 1`
/// and `0^p = +inf` (p < 0).
#[inline]
pub(crate) fn pow0(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        if p > 0.0 {
            0.0
        } else if p == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else if p == 2.0 {
        x * x
    } else if p == 0.5 {
        x.sqrt()
    } else {
        x.powf(p)
    }
}

/// Linear convolution `out[j] = sum_{m <= j} a[m] b[j - m]` for `j < a.len()`,
/// through zero-padded FFTs.
pub(crate) fn convolve_prefix(a: &[f64], b: &[f64]) -> Vec<f64> {
    use rustfft::num_complex::Complex64;
    use rustfft::FftPlanner;

    let n = a.len();
    assert_eq!(n, b.len());
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let lift = |x: &[f64]| {
        let mut v = vec![Complex64::new(0.0, 0.0); size];
        for (z, &x) in v.iter_mut().zip(x) {
            z.re = x;
        }
        v
    };
    let mut fa = lift(a);
    let mut fb = lift(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    fa.iter().take(n).map(|z| z.re / size as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow0_conventions() {
        assert_eq!(pow0(0.0, 0.5), 0.0);
        assert_eq!(pow0(0.0, 0.0), 1.0);
        assert_eq!(pow0(0.0, -0.5), f64::INFINITY);
        assert_eq!(pow0(4.0, 0.5), 2.0);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let fast = convolve_prefix(&a, &b);
        for j in 0..a.len() {
            let direct: f64 = (0..=j).map(|m| a[m] * b[j - m]).sum();
            assert!((fast[j] - direct).abs() < 1e-12);
        }
    }
}
