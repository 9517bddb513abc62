//! Local estimation theory for a qubit probe: Fisher information of the
//! population measurement, symmetric logarithmic derivative, quantum Fisher
//! information, QSNR and Cramér–Rao bounds.
//!
//! Divergent information (a vanishing population whose derivative does not
//! vanish) is returned as `f64::INFINITY` rather than an error, so sweeps
//! stay machine-readable; reports carry an explicit `divergent` flag.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dephasing::{
    colored_coefficient, evolve, rtn_coefficient, CoefficientMethod, DephasingCoefficient, InferenceParameter,
    ProbePreparation, QubitState,
};
use crate::error::{domain, Result};
use crate::noise::{ColoredParams, RtnParams};

/// Populations of a diagonal state family and their parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalPoint {
    pub p00: f64,
    pub p11: f64,
    pub dp00: f64,
    pub dp11: f64,
}

impl DiagonalPoint {
    /// p00 = (1 + Γ cos θ)/2 for the dephasing channel, with p11 taken from
    /// the coefficient's complement so it stays accurate as Γ → 1.
    pub fn dephasing(coeff: &DephasingCoefficient, theta: f64) -> Self {
        let c = theta.cos();
        let p11 = 0.5 * ((1.0 - c) + c * coeff.complement);
        Self { p00: 0.5 * (1.0 + c * coeff.value), p11, dp00: 0.5 * c * coeff.d_value, dp11: -0.5 * c * coeff.d_value }
    }
}

/// A one-parameter family of states diagonal in the measurement basis.
pub trait DiagonalFamily {
    fn point(&self, lambda: f64) -> Result<DiagonalPoint>;
}

impl<F> DiagonalFamily for F
where
    F: Fn(f64) -> Result<DiagonalPoint>,
{
    fn point(&self, lambda: f64) -> Result<DiagonalPoint> {
        self(lambda)
    }
}

/// |0⟩ probe under random telegraph noise at a fixed interaction time.
#[derive(Debug, Clone, Copy)]
pub struct RtnFamily {
    pub tau: f64,
}

impl DiagonalFamily for RtnFamily {
    fn point(&self, gamma: f64) -> Result<DiagonalPoint> {
        let c = rtn_coefficient(self.tau, &RtnParams::new(gamma)?)?;
        Ok(DiagonalPoint::dephasing(&c, 0.0))
    }
}

/// |0⟩ probe under colored noise; the family parameter is α.
#[derive(Debug, Clone, Copy)]
pub struct ColoredFamily {
    pub tau: f64,
    pub params: ColoredParams,
    pub method: CoefficientMethod,
}

impl DiagonalFamily for ColoredFamily {
    fn point(&self, alpha: f64) -> Result<DiagonalPoint> {
        let c = colored_coefficient(self.tau, &self.params.with_alpha(alpha), self.method)?;
        Ok(DiagonalPoint::dephasing(&c, 0.0))
    }
}

/// (∂p)²/p with the conventions 0 when ∂p = 0 and +∞ when p = 0 < |∂p|.
fn score_term(p: f64, dp: f64) -> f64 {
    if dp == 0.0 {
        0.0
    } else if p <= 0.0 {
        f64::INFINITY
    } else {
        dp * dp / p
    }
}

/// Fisher information of the population measurement,
/// F = (∂p00)²/p00 + (∂p11)²/p11.
pub fn fisher_population(family: &impl DiagonalFamily, lambda: f64) -> Result<f64> {
    let pt = family.point(lambda)?;
    Ok(fisher_from_point(&pt))
}

pub fn fisher_from_point(pt: &DiagonalPoint) -> f64 {
    score_term(pt.p00, pt.dp00) + score_term(pt.p11, pt.dp11)
}

/// Parameter derivative of a qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDerivative {
    pub dp00: f64,
    pub d_coherence: Complex64,
}

/// Diagonal symmetric logarithmic derivative diag(l0, l1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSld {
    pub l0: f64,
    pub l1: f64,
    /// Some entry is infinite: a zero eigenvalue with non-zero derivative.
    pub divergent: bool,
    /// max |(Lρ + ρL)/2 − ∂ρ| over the finite entries.
    pub residual: f64,
}

impl DiagonalSld {
    /// Tr[ρ L].
    pub fn mean(&self, state: &QubitState) -> f64 {
        state.p00 * self.l0 + state.p11() * self.l1
    }

    /// Tr[ρ L²], the quantum Fisher information.
    pub fn qfi(&self, state: &QubitState) -> f64 {
        if self.divergent {
            return f64::INFINITY;
        }
        state.p00 * self.l0 * self.l0 + state.p11() * self.l1 * self.l1
    }
}

/// SLD of a diagonal state with diagonal derivative: L_ii = ∂ρ_ii / ρ_ii.
pub fn sld_dephasing(state: &QubitState, d_state: &StateDerivative) -> Result<DiagonalSld> {
    if !state.is_diagonal() || d_state.d_coherence.norm() != 0.0 {
        return domain("sld_dephasing needs a diagonal state and a diagonal derivative");
    }
    let entry = |p: f64, dp: f64| -> f64 {
        if dp == 0.0 {
            0.0
        } else if p <= 0.0 {
            f64::INFINITY
        } else {
            dp / p
        }
    };
    let (p0, p1) = (state.p00, state.p11());
    let (d0, d1) = (d_state.dp00, -d_state.dp00);
    let (l0, l1) = (entry(p0, d0), entry(p1, d1));
    let divergent = l0.is_infinite() || l1.is_infinite();
    let residual = [(l0, p0, d0), (l1, p1, d1)]
        .iter()
        .filter(|(l, _, _)| l.is_finite())
        .map(|(l, p, d)| (l * p - d).abs())
        .fold(0.0, f64::max);
    if residual > 1e-12 {
        return domain(format!("SLD fails the Lyapunov relation by {residual:e}"));
    }
    Ok(DiagonalSld { l0, l1, divergent, residual })
}

/// QFI of a qubit from its spectral decomposition ρ = Σ ρₙ|φₙ⟩⟨φₙ|:
/// Σ (∂ρₙ)²/ρₙ + 4 (ρ₁ − ρ₂)²/(ρ₁ + ρ₂) |⟨φ₁|∂φ₂⟩|².
pub fn qfi_qubit(eigenvalues: (f64, f64), d_eigenvalues: (f64, f64), overlap_sq: f64) -> Result<f64> {
    let (r1, r2) = eigenvalues;
    if !(r1 >= -1e-15 && r2 >= -1e-15 && (r1 + r2 - 1.0).abs() < 1e-12) {
        return domain(format!("eigenvalues ({r1}, {r2}) must be a probability vector"));
    }
    if !(overlap_sq >= 0.0) {
        return domain("eigenvector overlap term must be non-negative");
    }
    let classical = score_term(r1, d_eigenvalues.0) + score_term(r2, d_eigenvalues.1);
    let quantum = if overlap_sq == 0.0 { 0.0 } else { 4.0 * (r1 - r2).powi(2) / (r1 + r2) * overlap_sq };
    Ok(classical + quantum)
}

/// QFI of a qubit from its Bloch vector r and derivative ∂r:
/// |∂r|² + (r·∂r)²/(1 − |r|²), and |∂r|² for pure states.
pub fn qfi_bloch(r: [f64; 3], dr: [f64; 3]) -> f64 {
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let radial = dot(r, dr);
    let purity_gap = 1.0 - dot(r, r);
    let tangential = dot(dr, dr);
    if purity_gap <= 1e-15 {
        return tangential;
    }
    tangential + radial * radial / purity_gap
}

/// cos²θ (∂Γ)² / (1 − Γ²), the QFI of a dephased preparation at polar
/// angle θ; 0 when ∂Γ = 0 and +∞ when |Γ| = 1 with ∂Γ ≠ 0.
pub fn qfi_dephasing(coeff: &DephasingCoefficient, theta: f64) -> Result<f64> {
    if !(coeff.value.abs() <= 1.0) {
        return domain(format!("dephasing coefficient must lie in [-1, 1], got {}", coeff.value));
    }
    let c2 = theta.cos().powi(2);
    let d2 = coeff.d_value * coeff.d_value;
    if d2 == 0.0 || c2 == 0.0 {
        return Ok(0.0);
    }
    let gap = coeff.complement * (1.0 + coeff.value);
    if gap <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c2 * d2 / gap)
}

/// QFI for an arbitrary pure preparation (θ, φ) through the Bloch formula.
pub fn qfi_preparation(coeff: &DephasingCoefficient, prep: &ProbePreparation) -> Result<f64> {
    let state = evolve(prep, coeff)?;
    let (st, ct) = prep.theta.sin_cos();
    let sp = prep.phi.sin();
    let dr = [0.0, coeff.d_value * st * sp, coeff.d_value * ct];
    Ok(qfi_bloch(state.bloch(), dr))
}

/// Best preparation on an n_theta × n_phi grid over [0, π] × [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationScan {
    pub theta: f64,
    pub phi: f64,
    pub qfi_max: f64,
    pub qfi_ground: f64,
}

pub fn scan_preparations(coeff: &DephasingCoefficient, n_theta: usize, n_phi: usize) -> Result<PreparationScan> {
    if n_theta < 2 || n_phi < 1 {
        return domain("preparation grid needs at least 2 polar and 1 azimuthal points");
    }
    let qfi_ground = qfi_preparation(coeff, &ProbePreparation::ground())?;
    let mut best = PreparationScan { theta: 0.0, phi: 0.0, qfi_max: qfi_ground, qfi_ground };
    for i in 0..n_theta {
        let theta = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            let h = qfi_preparation(coeff, &ProbePreparation { theta, phi })?;
            if h > best.qfi_max {
                best = PreparationScan { theta, phi, qfi_max: h, qfi_ground };
            }
        }
    }
    Ok(best)
}

/// FI, QFI, QSNR and single-shot Cramér–Rao bound at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub parameter: InferenceParameter,
    pub parameter_value: f64,
    pub interaction_time: f64,
    pub fisher_population: f64,
    pub qfi: f64,
    pub qsnr: f64,
    pub cr_bound_single_shot: f64,
    pub divergent: bool,
}

impl EstimationReport {
    pub const CSV_HEADER: [&'static str; 6] = ["lambda", "tau", "F", "H", "QSNR", "CR"];

    /// Builds a report for the |0⟩ probe from a dephasing coefficient.
    pub fn from_coefficient(parameter_value: f64, tau: f64, coeff: &DephasingCoefficient) -> Result<Self> {
        let qfi = qfi_dephasing(coeff, 0.0)?;
        let fisher = fisher_from_point(&DiagonalPoint::dephasing(coeff, 0.0));
        Ok(Self {
            parameter: coeff.parameter,
            parameter_value,
            interaction_time: tau,
            fisher_population: fisher,
            qfi,
            qsnr: parameter_value * parameter_value * qfi,
            cr_bound_single_shot: 1.0 / qfi,
            divergent: qfi.is_infinite(),
        })
    }

    pub fn csv_record(&self) -> [String; 6] {
        [
            self.parameter_value,
            self.interaction_time,
            self.fisher_population,
            self.qfi,
            self.qsnr,
            self.cr_bound_single_shot,
        ]
        .map(|v| v.to_string())
    }
}

pub fn write_reports_csv<W: Write>(reports: &[EstimationReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EstimationReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// H(τ, γ) = (∂γD)² / (1 − D²) with QSNR γ²H.
pub fn qfi_rtn(tau: f64, params: &RtnParams) -> Result<EstimationReport> {
    let c = rtn_coefficient(tau, params)?;
    EstimationReport::from_coefficient(params.gamma, tau, &c)
}

/// H(τ, α, N) = N² Λ^{2N−2} (∂αΛ)² / (1 − Λ^{2N}) with QSNR α²H, using
/// quadrature for Λ.
pub fn qfi_colored(tau: f64, params: &ColoredParams) -> Result<EstimationReport> {
    qfi_colored_with(tau, params, CoefficientMethod::Quadrature)
}

pub fn qfi_colored_with(tau: f64, params: &ColoredParams, method: CoefficientMethod) -> Result<EstimationReport> {
    let c = colored_coefficient(tau, params, method)?;
    EstimationReport::from_coefficient(params.alpha, tau, &c)
}

/// Single-fluctuator-per-rate form for N = 1: (∂αΛ)² / (1 − Λ²).
pub fn qfi_colored_single(lambda: &DephasingCoefficient) -> f64 {
    let gap = lambda.complement * (1.0 + lambda.value);
    if lambda.d_value == 0.0 {
        0.0
    } else if gap <= 0.0 {
        f64::INFINITY
    } else {
        lambda.d_value * lambda.d_value / gap
    }
}
