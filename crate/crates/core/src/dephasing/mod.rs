//! Dephasing coefficients and the states they produce.
//!
//! A pure-dephasing channel multiplies the off-diagonal element of the probe
//! density matrix by a real coefficient Γ ∈ [−1, 1]: D(τ, γ) for a single
//! telegraph fluctuator, Λ(τ, α)^N for N fluctuators with rates drawn from
//! p_α. Every evaluator also returns ∂Γ with respect to the inference
//! parameter.

mod colored;
mod rtn;
mod series;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::noise::ColoredParams;

pub use colored::{lambda_quadrature, lambda_quadrature_with};
pub use rtn::{rtn_coefficient, CRITICAL_BAND};
pub use series::{lambda_series, lambda_truncated, SeriesConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceParameter {
    Gamma,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMethod {
    ClosedForm,
    Quadrature,
    Series,
    Truncated,
}

impl CoefficientMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Quadrature => "quadrature",
            Self::Series => "series",
            Self::Truncated => "truncated",
        }
    }
}

impl std::str::FromStr for CoefficientMethod {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" | "closed-form" => Ok(Self::ClosedForm),
            "quadrature" => Ok(Self::Quadrature),
            "series" => Ok(Self::Series),
            "truncated" => Ok(Self::Truncated),
            other => domain(format!("unknown coefficient method {other:?}")),
        }
    }
}

/// Real dephasing factor Γ and its derivative with respect to `parameter`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingCoefficient {
    pub value: f64,
    pub d_value: f64,
    /// 1 − value, evaluated without cancellation where the evaluator can.
    pub complement: f64,
    pub parameter: InferenceParameter,
    pub method: CoefficientMethod,
    /// Absolute error estimate of `value` (zero for closed forms).
    pub est_error: f64,
    /// Number of series indices summed, for the series evaluators.
    pub terms: Option<usize>,
}

impl DephasingCoefficient {
    /// Coefficient with no parameter dependence, e.g. for hand-built states.
    pub fn fixed(value: f64, d_value: f64, parameter: InferenceParameter) -> Self {
        Self {
            value,
            d_value,
            complement: 1.0 - value,
            parameter,
            method: CoefficientMethod::ClosedForm,
            est_error: 0.0,
            terms: None,
        }
    }
}

/// Λ(τ, α)^N with the chain-rule derivative N Λ^{N−1} ∂Λ/∂α.
pub fn colored_coefficient(tau: f64, params: &ColoredParams, method: CoefficientMethod) -> Result<DephasingCoefficient> {
    let single = match method {
        CoefficientMethod::Quadrature => lambda_quadrature(tau, params)?,
        CoefficientMethod::Series => lambda_series(tau, params, SeriesConfig::default())?,
        CoefficientMethod::Truncated => lambda_truncated(tau, params)?,
        CoefficientMethod::ClosedForm => {
            return domain("colored noise has no closed form; use quadrature, series or truncated")
        }
    };
    Ok(power(single, params.n_fluctuators))
}

pub(crate) fn power(single: DephasingCoefficient, n: u32) -> DephasingCoefficient {
    if n == 1 {
        return single;
    }
    let nf = n as f64;
    let lower = single.value.powi(n as i32 - 1);
    let value = lower * single.value;
    let complement = if single.value > 0.0 {
        -(nf * (-single.complement).ln_1p()).exp_m1()
    } else {
        1.0 - value
    };
    DephasingCoefficient {
        value,
        d_value: nf * lower * single.d_value,
        complement,
        est_error: nf * lower.abs() * single.est_error,
        ..single
    }
}

/// Bloch angles of the initial pure state cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePreparation {
    pub theta: f64,
    pub phi: f64,
}

impl ProbePreparation {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return domain(format!("theta must lie in [0, pi], got {theta}"));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return domain(format!("phi must lie in [0, 2pi), got {phi}"));
        }
        Ok(Self { theta, phi })
    }

    /// |0⟩, the preparation that maximizes the information on Γ.
    pub fn ground() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }
}

/// Qubit density matrix [[p00, c], [c*, 1 − p00]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub p00: f64,
    pub coherence: Complex64,
}

impl QubitState {
    pub fn p11(&self) -> f64 {
        1.0 - self.p00
    }

    /// Bloch vector (x, y, z) with ρ = (𝕀 + r·σ)/2.
    pub fn bloch(&self) -> [f64; 3] {
        [2.0 * self.coherence.re, -2.0 * self.coherence.im, 2.0 * self.p00 - 1.0]
    }

    pub fn from_bloch(r: [f64; 3]) -> Self {
        Self { p00: 0.5 * (1.0 + r[2]), coherence: Complex64::new(0.5 * r[0], -0.5 * r[1]) }
    }

    pub fn is_diagonal(&self) -> bool {
        self.coherence.norm() == 0.0
    }

    /// Trace one by construction; checks 0 ≤ p00 ≤ 1 and |c|² ≤ p00 p11.
    pub fn is_physical(&self, tol: f64) -> bool {
        (-tol..=1.0 + tol).contains(&self.p00) && self.coherence.norm_sqr() <= self.p00 * self.p11() + tol
    }
}

/// Apply the dephasing channel to the prepared state.
///
/// The noise couples through σ_x, so ρ ↦ (1+Γ)/2 ρ + (1−Γ)/2 σ_x ρ σ_x:
/// the Bloch vector (sin θ cos φ, sin θ sin φ, cos θ) becomes
/// (sin θ cos φ, Γ sin θ sin φ, Γ cos θ).
pub fn evolve(prep: &ProbePreparation, coeff: &DephasingCoefficient) -> Result<QubitState> {
    let g = coeff.value;
    if !(g.abs() <= 1.0) {
        return domain(format!("dephasing coefficient must lie in [-1, 1], got {g}"));
    }
    let (st, ct) = prep.theta.sin_cos();
    let (sp, cp) = prep.phi.sin_cos();
    Ok(QubitState::from_bloch([st * cp, g * st * sp, g * ct]))
}
