//! Validation suite: closed forms against the Monte Carlo oracle, the
//! analytic limits, derivative consistency and Cramér–Rao saturation.
//!
//! The RTN model under test is injected, so a deliberately broken model
//! (for instance a sign error in ∂D/∂γ) can be shown to fail the suite.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dephasing::{rtn_coefficient, DephasingCoefficient};
use crate::error::Result;
use crate::montecarlo::{cr_saturation_study, mc_rtn_coefficient, mc_rtn_derivative, MleFamily};
use crate::noise::RtnParams;
use crate::optimize::{optimal_time_rtn, SearchConfig};
use crate::rng::derive_seed;

pub trait RtnModel: Sync {
    fn name(&self) -> &str;
    fn coefficient(&self, tau: f64, gamma: f64) -> Result<DephasingCoefficient>;
}

/// The library's closed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormRtn;

impl RtnModel for ClosedFormRtn {
    fn name(&self) -> &str {
        "closed_form"
    }

    fn coefficient(&self, tau: f64, gamma: f64) -> Result<DephasingCoefficient> {
        rtn_coefficient(tau, &RtnParams::new(gamma)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub seed: u64,
    pub gammas: Vec<f64>,
    pub taus: Vec<f64>,
    pub value_samples: usize,
    pub derivative_samples: usize,
    pub n_sigma: f64,
    pub cr_shots: u64,
    pub cr_repetitions: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            gammas: vec![0.1, 1.0, 2.0, 4.0, 10.0],
            taus: vec![0.5, FRAC_PI_2, 3.0],
            value_samples: 200_000,
            derivative_samples: 100_000,
            n_sigma: 3.0,
            cr_shots: 10_000,
            cr_repetitions: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub reference: f64,
    /// Allowed |value − reference| (absolute).
    pub tolerance: f64,
    /// Seed of the stochastic check, absent for deterministic ones.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model: String,
    pub root_seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Builder {
    checks: Vec<CheckRecord>,
}

impl Builder {
    fn push(&mut self, suite: &str, name: String, value: f64, reference: f64, tolerance: f64, seed: Option<u64>) {
        let passed = (value - reference).abs() <= tolerance;
        self.checks.push(CheckRecord { suite: suite.into(), name, passed, value, reference, tolerance, seed });
    }
}

/// Runs every check; never stops at the first failure.
pub fn run_validation(model: &dyn RtnModel, cfg: &ValidationConfig) -> Result<ValidationReport> {
    let mut b = Builder { checks: Vec::new() };
    let mut label = 0u64;
    let mut next_seed = || {
        label += 1;
        derive_seed(cfg.seed, label)
    };

    for &g in &cfg.gammas {
        for &t in &cfg.taus {
            let c = model.coefficient(t, g)?;
            let p = RtnParams::new(g)?;
            let seed = next_seed();
            let mc = mc_rtn_coefficient(&p, t, cfg.value_samples, seed)?;
            let name = format!("value gamma={g} tau={t:.4}");
            b.push("oracle", name, c.value, mc.mean, cfg.n_sigma * mc.std_error, Some(seed));
            let seed = next_seed();
            let md = mc_rtn_derivative(&p, t, cfg.derivative_samples, seed, 1e-3)?;
            let name = format!("derivative gamma={g} tau={t:.4}");
            b.push("oracle", name, c.d_value, md.mean, cfg.n_sigma * md.std_error, Some(seed));
        }
    }

    for i in 1..=8 {
        let t = 0.4 * i as f64;
        let v = model.coefficient(t, 1e-12)?.value;
        b.push("limits", format!("no switching tau={t:.1}"), v, (2.0 * t).cos(), 1e-8, None);
        let v = model.coefficient(t, 1e7)?.value;
        b.push("limits", format!("decoupled tau={t:.1}"), v, 1.0, 1e-5, None);
    }

    for &g in &cfg.gammas {
        for &t in &cfg.taus {
            let c = model.coefficient(t, g)?;
            let fd = richardson(|x| Ok(model.coefficient(t, x)?.value), g, 1e-5 * g.max(1.0))?;
            let tol = 1e-6 * fd.abs().max(1e-4);
            b.push("derivative", format!("finite difference gamma={g} tau={t:.4}"), c.d_value, fd, tol, None);
        }
    }

    let tau_opt = optimal_time_rtn(&RtnParams::new(1.0)?, &SearchConfig::default())?.tau_opt;
    let seed = next_seed();
    let study = cr_saturation_study(&MleFamily::Rtn, 1.0, tau_opt, cfg.cr_shots, cfg.cr_repetitions, seed)?;
    let slack = 3.0 * (2.0 / cfg.cr_repetitions as f64).sqrt();
    let (lo, hi) = (1.0 - slack, 1.2 + slack);
    b.push("cramer-rao", "variance ratio gamma=1".into(), study.variance_ratio, 0.5 * (lo + hi), 0.5 * (hi - lo), Some(seed));
    let valid = if study.valid { 1.0 } else { 0.0 };
    b.push("cramer-rao", "boundary estimates at most 1%".into(), valid, 1.0, 0.0, Some(seed));

    let passed = b.checks.iter().all(|c| c.passed);
    Ok(ValidationReport { model: model.name().into(), root_seed: cfg.seed, passed, checks: b.checks })
}

/// Central difference with one Richardson step.
pub fn richardson<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
