//! Closed-form dephasing coefficient of a single telegraph fluctuator,
//! D(τ, γ) = e^{−γτ} (cosh δτ + γ sinh δτ / δ), δ = √(γ² − 4).
//!
//! With u = (γ² − 4) τ² the three regimes share one representation:
//!
//! ```text
//! C(u) = cosh √u,  S(u) = sinh √u / √u,  T(u) = (C − S) / u
//! D    = e^{−γτ} (C + γτ S)
//! ∂γD  = 4 τ³ e^{−γτ} T
//! ```
//!
//! u < 0 is the oscillating (slow) branch, evaluated with cos/sin of
//! ω τ = √(−u); u > 0 is the monotone (fast) branch, evaluated with the
//! decaying exponentials e^{−(γ∓δ)τ} so nothing overflows; |u| < 1 uses the
//! power series, which removes the 0/0 at γ = 2.

use super::{CoefficientMethod, DephasingCoefficient, InferenceParameter};
use crate::error::{domain, Result};
use crate::noise::RtnParams;

/// Half-width of the band around γ = 2 where the analytic limit is used.
pub const CRITICAL_BAND: f64 = 1e-8;

/// D(τ, γ) and ∂D/∂γ with its parameter tag.
pub fn rtn_coefficient(tau: f64, params: &RtnParams) -> Result<DephasingCoefficient> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return domain(format!("interaction time must be finite and non-negative, got {tau}"));
    }
    RtnParams::new(params.gamma)?;
    let (value, d_value) = rtn_value_and_derivative(tau, params.gamma);
    Ok(DephasingCoefficient {
        value,
        d_value,
        complement: rtn_complement(tau, params.gamma, value),
        parameter: InferenceParameter::Gamma,
        method: CoefficientMethod::ClosedForm,
        est_error: 0.0,
        terms: None,
    })
}

/// 1 − D(τ, γ) without cancellation at short times, given `value` = D.
///
/// D solves D'' + 2γD' + 4D = 0 with D(0) = 1, D'(0) = 0, so its Taylor
/// coefficients follow a three-term recurrence.
pub(crate) fn rtn_complement(tau: f64, gamma: f64, value: f64) -> f64 {
    if gamma * tau > 1.0 || tau > 0.5 {
        return 1.0 - value;
    }
    // a_n = D⁽ⁿ⁾(0) τⁿ / n!
    let (mut a0, mut a1) = (1.0, 0.0);
    let mut sum = 0.0;
    for n in 0..200 {
        let nf = n as f64;
        let a2 = -2.0 * gamma * tau * a1 / (nf + 2.0) - 4.0 * tau * tau * a0 / ((nf + 1.0) * (nf + 2.0));
        sum -= a2;
        if a2.abs() <= 1e-17 * sum.abs() && a1.abs() <= 1e-17 * sum.abs() {
            break;
        }
        a0 = a1;
        a1 = a2;
    }
    sum
}

/// Unchecked evaluation for inner loops. Requires τ ≥ 0, γ > 0.
pub(crate) fn rtn_value_and_derivative(tau: f64, gamma: f64) -> (f64, f64) {
    if tau == 0.0 {
        return (1.0, 0.0);
    }
    if (gamma - 2.0).abs() < CRITICAL_BAND {
        let e = (-2.0 * tau).exp();
        return (e * (1.0 + 2.0 * tau), 4.0 / 3.0 * tau.powi(3) * e);
    }
    let s = (gamma - 2.0) * (gamma + 2.0);
    let u = s * tau * tau;
    let (ec, es, et) = scaled_cst(gamma, tau, s, u);
    let value = ec + gamma * tau * es;
    let d_value = 4.0 * tau.powi(3) * et;
    (value, d_value)
}

/// (e^{−γτ}C, e^{−γτ}S, e^{−γτ}T).
fn scaled_cst(gamma: f64, tau: f64, s: f64, u: f64) -> (f64, f64, f64) {
    if u.abs() < 1.0 {
        let damp = (-gamma * tau).exp();
        let (c, sh, t) = cst_series(u);
        return (damp * c, damp * sh, damp * t);
    }
    if u < 0.0 {
        let damp = (-gamma * tau).exp();
        let w = (-u).sqrt();
        let c = w.cos();
        let sh = w.sin() / w;
        return (damp * c, damp * sh, damp * (c - sh) / u);
    }
    let delta = s.sqrt();
    let z = delta * tau;
    // γ − δ = 4 / (γ + δ) without cancellation
    let slow_rate = 4.0 / (gamma + delta);
    let a = (-slow_rate * tau).exp();
    let b = (-(gamma + delta) * tau).exp();
    let ec = 0.5 * (a + b);
    let es = 0.5 * (a - b) / z;
    (ec, es, (ec - es) / u)
}

fn cst_series(u: f64) -> (f64, f64, f64) {
    // C = Σ uᵏ/(2k)!, S = Σ uᵏ/(2k+1)!, T = Σ_{k≥1} 2k u^{k−1}/(2k+1)!
    let mut c = 1.0;
    let mut sh = 1.0;
    let mut t = 0.0;
    let mut pow = 1.0; // u^{k-1}
    let mut fact_even = 1.0; // (2k)!
    for k in 1..=20 {
        let kf = k as f64;
        fact_even *= (2.0 * kf - 1.0) * (2.0 * kf);
        let fact_odd = fact_even * (2.0 * kf + 1.0);
        t += 2.0 * kf * pow / fact_odd;
        pow *= u;
        c += pow / fact_even;
        sh += pow / fact_odd;
        if pow.abs() / fact_even < 1e-18 {
            break;
        }
    }
    (c, sh, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn d(tau: f64, gamma: f64) -> DephasingCoefficient {
        rtn_coefficient(tau, &RtnParams::new(gamma).unwrap()).unwrap()
    }

    // Direct transcription of the closed form in complex-free branches.
    fn textbook(tau: f64, gamma: f64) -> f64 {
        if gamma < 2.0 {
            let w = (4.0 - gamma * gamma).sqrt();
            (-gamma * tau).exp() * ((w * tau).cos() + gamma * (w * tau).sin() / w)
        } else {
            let dl = (gamma * gamma - 4.0).sqrt();
            (-gamma * tau).exp() * ((dl * tau).cosh() + gamma * (dl * tau).sinh() / dl)
        }
    }

    #[test]
    fn unity_at_zero_time() {
        for &g in &[1e-6, 0.3, 2.0, 5.0, 1e3] {
            let c = d(0.0, g);
            assert_eq!(c.value, 1.0);
            assert_eq!(c.d_value, 0.0);
        }
    }

    #[test]
    fn no_switching_limit_is_cos_two_tau() {
        for i in 0..=100 {
            let tau = 0.1 * i as f64;
            assert!((d(tau, 1e-12).value - (2.0 * tau).cos()).abs() < 1e-8);
        }
        assert!((d(PI / 2.0, 1e-12).value + 1.0).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_textbook_branches_away_from_critical_rate() {
        for &g in &[0.01, 0.5, 1.5, 1.99, 2.01, 3.0, 10.0, 40.0] {
            for &tau in &[0.05, 0.7, 1.3, 4.0, 9.0] {
                let want = textbook(tau, g);
                assert!((d(tau, g).value - want).abs() < 1e-12, "γ = {g}, τ = {tau}");
            }
        }
    }

    #[test]
    fn critical_rate_is_continuous() {
        for &tau in &[0.1, 1.0, 3.0] {
            let at = d(tau, 2.0);
            let lim = (-2.0 * tau).exp() * (1.0 + 2.0 * tau);
            assert!((at.value - lim).abs() < 1e-15);
            for &eps in &[1e-7, -1e-7, 1e-4, -1e-4] {
                let near = d(tau, 2.0 + eps);
                assert!((near.value - at.value).abs() < 10.0 * eps.abs());
                assert!((near.d_value - at.d_value).abs() < 10.0 * eps.abs());
            }
        }
    }

    #[test]
    fn complement_is_accurate_at_short_times() {
        for &g in &[1e-3, 0.7, 2.0, 3.0, 50.0] {
            for &tau in &[1e-3, 0.01, 0.2, 0.45] {
                let c = d(tau, g);
                assert!((c.complement - (1.0 - c.value)).abs() < 1e-15, "γ = {g}, τ = {tau}");
            }
            let tiny = d(1e-9, g);
            assert!((tiny.complement / 2e-18 - 1.0).abs() < 1e-6);
        }
        let c = d(3.0, 0.4);
        assert_eq!(c.complement, 1.0 - c.value);
    }

    #[test]
    fn large_rate_does_not_overflow() {
        let c = d(400.0, 1000.0);
        assert!(c.value.is_finite() && c.d_value.is_finite());
        let approx = (-2.0 * 400.0 / 1000.0f64).exp();
        assert!((c.value - approx).abs() < 1e-3);
    }

    #[test]
    fn rejects_negative_inputs() {
        assert!(rtn_coefficient(-1.0, &RtnParams { gamma: 1.0 }).is_err());
        assert!(rtn_coefficient(1.0, &RtnParams { gamma: -1.0 }).is_err());
    }
}
