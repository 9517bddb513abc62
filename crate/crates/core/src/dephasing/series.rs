//! Series representation of Λ(τ, α) in terms of ₀F₁ and incomplete gamma
//! functions, and its first-term truncation.
//!
//! Substituting y = γτ and expanding cosh/sinh gives
//!
//! ```text
//! Λ = N_α τ^{α−1} Σ_{p≥0} [ Φ_{p+½}(−τ²)/(2p)!   · ΔΓ(2p+1−α)
//!                         + Φ_{p+3/2}(−τ²)/(2p+1)! · ΔΓ(2p+2−α) ]
//! ΔΓ(a) = Γ(a, γ₁τ) − Γ(a, γ₂τ)
//! ```
//!
//! Every Φ is bounded by one and every ΔΓ/(2p)! is positive, so the sum has
//! no cancellation, but the terms only start to fall off once 2p exceeds
//! γ₂τ. The number of terms therefore grows linearly with γ₂τ.

use serde::{Deserialize, Serialize};

use super::{CoefficientMethod, DephasingCoefficient, InferenceParameter};
use crate::error::{domain, Error, Result};
use crate::noise::ColoredParams;
use crate::special::{gamma_between, gamma_pq, hyp0f1_half_orders, ln_gamma};
use crate::validate::richardson;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Cap on the summation index p.
    pub max_terms: usize,
    /// Stop once a term pair falls below this (relative to the running sum).
    pub tolerance: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { max_terms: 4000, tolerance: 1e-15 }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return domain("max_terms must be at least 1");
        }
        if !(self.tolerance > 0.0) {
            return domain(format!("series tolerance must be positive, got {}", self.tolerance));
        }
        Ok(())
    }
}

/// Full series evaluation. `d_value` is a Richardson-extrapolated central
/// difference of the series in α.
pub fn lambda_series(tau: f64, params: &ColoredParams, cfg: SeriesConfig) -> Result<DephasingCoefficient> {
    check_tau(tau)?;
    params.validate()?;
    cfg.validate()?;
    let eval = |a: f64| series_sum(tau, a, params.gamma1, params.gamma2, cfg).map(|(v, _)| v);
    let (value, terms) = series_sum(tau, params.alpha, params.gamma1, params.gamma2, cfg)?;
    let d_value = richardson(eval, params.alpha, 1e-3)?;
    Ok(DephasingCoefficient {
        value,
        d_value,
        complement: 1.0 - value,
        parameter: InferenceParameter::Alpha,
        method: CoefficientMethod::Series,
        est_error: 0.0,
        terms: Some(terms),
    })
}

/// First-term (p = 0) approximation, reliable only for α ≳ 3/2:
/// Λ ≃ ½ N_α τ^{α−2} [2τ cos 2τ ΔΓ(1−α) + sin 2τ ΔΓ(2−α)].
pub fn lambda_truncated(tau: f64, params: &ColoredParams) -> Result<DephasingCoefficient> {
    check_tau(tau)?;
    params.validate()?;
    let eval = |a: f64| truncated_value(tau, a, params.gamma1, params.gamma2);
    let value = eval(params.alpha)?;
    let d_value = richardson(eval, params.alpha, 1e-3)?;
    Ok(DephasingCoefficient {
        value,
        d_value,
        complement: 1.0 - value,
        parameter: InferenceParameter::Alpha,
        method: CoefficientMethod::Truncated,
        est_error: 0.0,
        terms: Some(1),
    })
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return domain(format!("series forms need a positive finite interaction time, got {tau}"));
    }
    Ok(())
}

fn prefactor(tau: f64, alpha: f64, gamma1: f64, gamma2: f64) -> f64 {
    let p = ColoredParams { alpha, gamma1, gamma2, n_fluctuators: 1 };
    p.normalization() * tau.powf(alpha - 1.0)
}

pub(crate) fn truncated_value(tau: f64, alpha: f64, gamma1: f64, gamma2: f64) -> Result<f64> {
    let (x1, x2) = (gamma1 * tau, gamma2 * tau);
    let two_tau = 2.0 * tau;
    let bracket = two_tau.cos() * gamma_between(1.0 - alpha, x1, x2)?
        + two_tau.sin() / two_tau * gamma_between(2.0 - alpha, x1, x2)?;
    Ok(prefactor(tau, alpha, gamma1, gamma2) * bracket)
}

/// Returns (Λ, number of p-indices summed).
pub(crate) fn series_sum(tau: f64, alpha: f64, gamma1: f64, gamma2: f64, cfg: SeriesConfig) -> Result<(f64, usize)> {
    let (x1, x2) = (gamma1 * tau, gamma2 * tau);
    let pref = prefactor(tau, alpha, gamma1, gamma2);
    // Terms decay super-exponentially once 2p is a few √x₂ beyond x₂.
    let expected = ((x2 + 12.0 * x2.sqrt() + 40.0) / 2.0).ceil() as usize;
    let n_phi = expected.min(cfg.max_terms) + 1;
    let phi = hyp0f1_half_orders(tau, n_phi)?;

    let mut sum = phi[0] * gamma_between(1.0 - alpha, x1, x2)? + phi[1] * gamma_between(2.0 - alpha, x1, x2)?;
    let mut last = sum.abs();
    for p in 1..cfg.max_terms {
        if p + 1 >= phi.len() {
            break;
        }
        let m = 2 * p;
        let term = phi[p] * scaled_gamma_between(m as f64 + 1.0 - alpha, m, x1, x2)?
            + phi[p + 1] * scaled_gamma_between(m as f64 + 2.0 - alpha, m + 1, x1, x2)?;
        sum += term;
        last = term.abs();
        let past_peak = m as f64 + 1.0 - alpha > x2;
        if past_peak && (pref * term).abs() < cfg.tolerance * (pref * sum).abs().max(f64::MIN_POSITIVE) {
            return Ok((pref * sum, p + 1));
        }
    }
    Err(Error::Series {
        partial_sum: pref * sum,
        last_term: (pref * last).abs(),
        terms: cfg.max_terms.min(phi.len().saturating_sub(1)),
    })
}

/// ΔΓ(a) / m! for a > 0 via regularized functions, so large a cannot overflow.
fn scaled_gamma_between(a: f64, m: usize, x1: f64, x2: f64) -> Result<f64> {
    let (p1, q1) = gamma_pq(a, x1)?;
    let (p2, q2) = gamma_pq(a, x2)?;
    // difference of whichever tail is small, to avoid 1 − 1
    let diff = if p2 <= 0.5 { p2 - p1 } else { q1 - q2 };
    let log_ratio = ln_gamma(a) - ln_gamma(m as f64 + 1.0);
    Ok(diff * log_ratio.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dephasing::lambda_quadrature;

    fn params(alpha: f64) -> ColoredParams {
        ColoredParams::with_default_window(alpha, 1).unwrap()
    }

    #[test]
    fn matches_quadrature_for_steep_spectra() {
        for &tau in &[0.5, 1.0, 5.0] {
            let p = params(1.8);
            let s = lambda_series(tau, &p, SeriesConfig::default()).unwrap();
            let q = lambda_quadrature(tau, &p).unwrap();
            assert!((s.value - q.value).abs() < 1e-8, "τ = {tau}: {} vs {}", s.value, q.value);
            assert!(s.terms.unwrap() > 1);
        }
    }

    #[test]
    fn pink_spectrum_series_matches_quadrature() {
        let p = params(1.0);
        let s = lambda_series(1.0, &p, SeriesConfig::default()).unwrap();
        let q = lambda_quadrature(1.0, &p).unwrap();
        assert!((s.value - q.value).abs() < 1e-8);
    }

    #[test]
    fn term_cap_reports_partial_sum() {
        let cfg = SeriesConfig { max_terms: 5, tolerance: 1e-15 };
        match lambda_series(3.0, &params(1.5), cfg) {
            Err(Error::Series { terms, last_term, .. }) => {
                assert!(terms <= 5);
                assert!(last_term > 0.0);
            }
            other => panic!("expected series error, got {other:?}"),
        }
    }

    #[test]
    fn requires_positive_time() {
        assert!(lambda_series(0.0, &params(1.5), SeriesConfig::default()).is_err());
        assert!(lambda_truncated(0.0, &params(1.5)).is_err());
        assert!(lambda_series(1.0, &params(1.5), SeriesConfig { max_terms: 0, tolerance: 1e-12 }).is_err());
    }

    #[test]
    fn truncation_tends_to_one_at_short_times() {
        let q = lambda_quadrature(1e-4, &params(1.8)).unwrap();
        let t = lambda_truncated(1e-4, &params(1.8)).unwrap();
        assert!((q.value - t.value).abs() < 1e-4);
        assert!((t.value - 1.0).abs() < 1e-3);
    }
}
