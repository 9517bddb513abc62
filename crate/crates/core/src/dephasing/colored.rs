//! Λ(τ, α) = ∫ p_α(γ) D(τ, γ) dγ by adaptive quadrature, with the analytic
//! α-derivative ∫ ∂_α p_α(γ) D(τ, γ) dγ integrated on the same nodes.

use std::f64::consts::PI;

use super::rtn::{rtn_complement, rtn_value_and_derivative};
use super::{CoefficientMethod, DephasingCoefficient, InferenceParameter};
use crate::error::{domain, Result};
use crate::noise::ColoredParams;
use crate::quadrature::{integrate, QuadConfig};

/// Λ(τ, α) and ∂Λ/∂α by quadrature, relative tolerance 1e−10.
pub fn lambda_quadrature(tau: f64, params: &ColoredParams) -> Result<DephasingCoefficient> {
    lambda_quadrature_with(tau, params, QuadConfig::default())
}

pub fn lambda_quadrature_with(tau: f64, params: &ColoredParams, cfg: QuadConfig) -> Result<DephasingCoefficient> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return domain(format!("interaction time must be finite and non-negative, got {tau}"));
    }
    params.validate()?;
    let (value, d_value, complement, est_error) = if tau == 0.0 {
        (1.0, 0.0, 0.0, 0.0)
    } else {
        raw_lambda(tau, params.alpha, params.gamma1, params.gamma2, cfg)?
    };
    Ok(DephasingCoefficient {
        value,
        d_value,
        complement,
        parameter: InferenceParameter::Alpha,
        method: CoefficientMethod::Quadrature,
        est_error,
        terms: None,
    })
}

/// Quadrature without range validation on α, so finite-difference oracles
/// may step slightly past the supported interval. Returns
/// (Λ, ∂Λ/∂α, 1 − Λ, error estimate).
pub(crate) fn raw_lambda(tau: f64, alpha: f64, gamma1: f64, gamma2: f64, cfg: QuadConfig) -> Result<(f64, f64, f64, f64)> {
    let p = ColoredParams { alpha, gamma1, gamma2, n_fluctuators: 1 };
    let norm = p.normalization();
    let dlog_norm = p.d_log_normalization();
    let breaks = breakpoints(tau, gamma1, gamma2);
    // Integrate in u = ln γ: p_α(γ) dγ = N_α e^{(1−α)u} du.
    let r = integrate::<3, _>(
        |u| {
            let g = u.exp();
            let weight = norm * ((1.0 - alpha) * u).exp();
            let (dv, _) = rtn_value_and_derivative(tau, g);
            let comp = rtn_complement(tau, g, dv);
            Ok([weight * dv, weight * (dlog_norm - u) * dv, weight * comp])
        },
        &breaks,
        cfg,
    )?;
    Ok((r.value[0], r.value[1], r.value[2], r.error[0].max(r.error[1])))
}

/// ln γ split points: the slow/fast boundary γ = 2 and, on the slow side,
/// the rates where ω(γ)τ = kπ/2 with ω = √(4 − γ²).
fn breakpoints(tau: f64, gamma1: f64, gamma2: f64) -> Vec<f64> {
    let mut pts = vec![gamma1.ln(), gamma2.ln()];
    let mut push = |g: f64| {
        if g > gamma1 && g < gamma2 {
            pts.push(g.ln());
        }
    };
    push(2.0);
    let mut k = 1;
    loop {
        let w = k as f64 * PI / (2.0 * tau);
        if w >= 2.0 {
            break;
        }
        push((4.0 - w * w).sqrt());
        k += 1;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_at_zero_time() {
        for &a in &[0.5, 1.0, 2.0] {
            let c = lambda_quadrature(0.0, &ColoredParams::with_default_window(a, 1).unwrap()).unwrap();
            assert_eq!(c.value, 1.0);
            assert_eq!(c.d_value, 0.0);
        }
    }

    #[test]
    fn bounded_by_one() {
        for &a in &[0.5, 0.9, 1.0, 1.4, 2.0] {
            let p = ColoredParams::with_default_window(a, 1).unwrap();
            for i in 1..40 {
                let v = lambda_quadrature(0.3 * i as f64, &p).unwrap().value;
                assert!(v.abs() <= 1.0, "α = {a}");
            }
        }
    }

    #[test]
    fn complement_matches_value() {
        let p = ColoredParams::with_default_window(1.3, 1).unwrap();
        let c = lambda_quadrature(2.0, &p).unwrap();
        assert!((c.complement - (1.0 - c.value)).abs() < 1e-10);
        let small = lambda_quadrature(1e-6, &p).unwrap();
        assert!(small.complement > 0.0);
        assert!((small.complement / 2e-12 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn breakpoints_are_sorted_inside_window() {
        let b = breakpoints(5.0, 0.01, 100.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b[0], 0.01f64.ln());
        assert_eq!(*b.last().unwrap(), 100f64.ln());
        assert!(b.contains(&2f64.ln()));
    }

    #[test]
    fn point_window_reduces_to_single_fluctuator() {
        let g = 0.7;
        let p = ColoredParams::new(1.3, g, g * (1.0 + 1e-7), 1).unwrap();
        let l = lambda_quadrature(1.1, &p).unwrap().value;
        let (d, _) = rtn_value_and_derivative(1.1, g);
        assert!((l - d).abs() < 1e-6);
    }
}
