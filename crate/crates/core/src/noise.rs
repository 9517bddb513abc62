//! Classical noise sources: single random-telegraph fluctuators and the
//! power-law distribution of switching rates behind 1/f^α noise.
//!
//! Time and rates are dimensionless (in units of the probe coupling).

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng;

/// Default spectral window (γ₁, γ₂) for colored noise.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-2, 1e2);

/// Supported range of the color exponent α.
pub const ALPHA_RANGE: (f64, f64) = (0.5, 2.0);

/// Half-width of the band around α = 1 where the logarithmic branch of the
/// rate distribution is used.
pub const PINK_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// γ < 2: damped oscillating coherence.
    Slow,
    /// γ > 2: monotone decay.
    Fast,
    /// γ = 2 exactly (within 1e−8).
    Critical,
}

/// Random telegraph noise with dimensionless switching rate γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtnParams {
    pub gamma: f64,
}

impl RtnParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return domain(format!("switching rate must be positive and finite, got {gamma}"));
        }
        Ok(Self { gamma })
    }

    pub fn regime(&self) -> Regime {
        if (self.gamma - 2.0).abs() < 1e-8 {
            Regime::Critical
        } else if self.gamma < 2.0 {
            Regime::Slow
        } else {
            Regime::Fast
        }
    }
}

/// Collection of `n_fluctuators` independent fluctuators whose rates follow
/// p_α(γ) ∝ γ^{−α} on [γ₁, γ₂].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColoredParams {
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub n_fluctuators: u32,
}

impl ColoredParams {
    pub fn new(alpha: f64, gamma1: f64, gamma2: f64, n_fluctuators: u32) -> Result<Self> {
        let p = Self { alpha, gamma1, gamma2, n_fluctuators };
        p.validate()?;
        Ok(p)
    }

    /// Parameters on the default window.
    pub fn with_default_window(alpha: f64, n_fluctuators: u32) -> Result<Self> {
        Self::new(alpha, DEFAULT_WINDOW.0, DEFAULT_WINDOW.1, n_fluctuators)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = ALPHA_RANGE;
        if !(self.alpha >= lo && self.alpha <= hi) {
            return domain(format!("alpha must lie in [{lo}, {hi}], got {}", self.alpha));
        }
        if !(self.gamma1 > 0.0) || !self.gamma2.is_finite() || !(self.gamma1 < self.gamma2) {
            return domain(format!(
                "window must satisfy 0 < gamma1 < gamma2 < inf, got ({}, {})",
                self.gamma1, self.gamma2
            ));
        }
        if self.n_fluctuators == 0 {
            return domain("n_fluctuators must be at least 1");
        }
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }

    pub fn with_n(&self, n_fluctuators: u32) -> Self {
        Self { n_fluctuators, ..*self }
    }

    fn log_width(&self) -> f64 {
        (self.gamma2 / self.gamma1).ln()
    }

    fn is_pink(&self) -> bool {
        (self.alpha - 1.0).abs() <= PINK_BAND
    }

    /// Normalization N_α(γ₁, γ₂) so that N_α ∫ γ^{−α} dγ = 1.
    pub fn normalization(&self) -> f64 {
        let width = self.log_width();
        if self.is_pink() {
            return 1.0 / width;
        }
        // β / (γ₁^{−β} − γ₂^{−β}) rewritten as h(βΔ) γ₁^β / Δ with
        // h(x) = x / (1 − e^{−x}), smooth through x = 0.
        let beta = self.alpha - 1.0;
        let x = beta * width;
        let h = x / -(-x).exp_m1();
        h * (beta * self.gamma1.ln()).exp() / width
    }

    /// ∂ ln N_α / ∂α, continuous across α = 1.
    pub fn d_log_normalization(&self) -> f64 {
        let width = self.log_width();
        let x = (self.alpha - 1.0) * width;
        // 1/x − 1/(eˣ − 1)
        let ratio = if x.abs() < 1e-3 {
            0.5 - x / 12.0 + x * x * x / 720.0
        } else {
            1.0 / x - 1.0 / x.exp_m1()
        };
        width * ratio + self.gamma1.ln()
    }
}

/// Switching-rate density p_α(γ); zero outside [γ₁, γ₂].
pub fn pdf_alpha(gamma: f64, params: &ColoredParams) -> Result<f64> {
    params.validate()?;
    if gamma < params.gamma1 || gamma > params.gamma2 {
        return Ok(0.0);
    }
    Ok(params.normalization() * gamma.powf(-params.alpha))
}

/// ∂p_α(γ)/∂α = p_α(γ) (∂ ln N_α/∂α − ln γ).
pub fn d_pdf_d_alpha(gamma: f64, params: &ColoredParams) -> Result<f64> {
    Ok(pdf_alpha(gamma, params)? * (params.d_log_normalization() - gamma.ln()))
}

/// Cumulative distribution of the switching rate.
pub fn cdf_alpha(gamma: f64, params: &ColoredParams) -> Result<f64> {
    params.validate()?;
    if gamma <= params.gamma1 {
        return Ok(0.0);
    }
    if gamma >= params.gamma2 {
        return Ok(1.0);
    }
    let ell = (gamma / params.gamma1).ln();
    let width = params.log_width();
    if params.is_pink() {
        return Ok(ell / width);
    }
    let beta = params.alpha - 1.0;
    Ok((-beta * ell).exp_m1() / (-beta * width).exp_m1())
}

/// Draw one switching rate from p_α by closed-form CDF inversion.
pub fn sample_switching_rate<R: Rng + ?Sized>(params: &ColoredParams, rng: &mut R) -> Result<f64> {
    params.validate()?;
    let u: f64 = rng.random();
    let width = params.log_width();
    let ell = if params.is_pink() {
        u * width
    } else {
        let beta = params.alpha - 1.0;
        -(u * (-beta * width).exp_m1()).ln_1p() / beta
    };
    Ok((params.gamma1 * ell.exp()).clamp(params.gamma1, params.gamma2))
}

/// One realization of a ±1 telegraph signal on [0, horizon].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtnTrajectory {
    pub initial_value: i8,
    /// Strictly increasing switch instants in (0, horizon].
    pub switch_times: Vec<f64>,
    pub horizon: f64,
}

impl RtnTrajectory {
    pub fn new(initial_value: i8, switch_times: Vec<f64>, horizon: f64) -> Result<Self> {
        if initial_value != 1 && initial_value != -1 {
            return domain(format!("initial value must be +1 or -1, got {initial_value}"));
        }
        if !(horizon > 0.0) {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        let ordered = switch_times.windows(2).all(|w| w[0] < w[1]);
        let inside = switch_times.iter().all(|&t| t > 0.0 && t <= horizon);
        if !ordered || !inside {
            return domain("switch times must be strictly increasing within (0, horizon]");
        }
        Ok(Self { initial_value, switch_times, horizon })
    }

    /// c(t), taking the post-switch value at a switch instant.
    pub fn value_at(&self, t: f64) -> i8 {
        let flips = self.switch_times.partition_point(|&s| s <= t);
        if flips % 2 == 0 {
            self.initial_value
        } else {
            -self.initial_value
        }
    }

    /// ∫_{t0}^{t1} c(s) ds for 0 ≤ t0 ≤ t1 ≤ horizon.
    pub fn integrate_between(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(0.0 <= t0 && t0 <= t1 && t1 <= self.horizon) {
            return domain(format!("integration bounds [{t0}, {t1}] outside [0, {}]", self.horizon));
        }
        let start = self.switch_times.partition_point(|&s| s <= t0);
        let mut value = f64::from(self.value_at(t0));
        let mut last = t0;
        let mut acc = 0.0;
        for &s in &self.switch_times[start..] {
            if s >= t1 {
                break;
            }
            acc += value * (s - last);
            value = -value;
            last = s;
        }
        Ok(acc + value * (t1 - last))
    }
}

/// Event-driven sampling: uniform ±1 start, exponential waiting times with
/// mean 1/γ, no time grid.
pub fn sample_rtn_trajectory<R: Rng + ?Sized>(params: &RtnParams, horizon: f64, rng: &mut R) -> Result<RtnTrajectory> {
    RtnParams::new(params.gamma)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return domain(format!("horizon must be positive and finite, got {horizon}"));
    }
    let initial_value = if rng.random::<bool>() { 1 } else { -1 };
    let wait = Exp::new(params.gamma).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut switch_times = Vec::new();
    let mut t = 0.0;
    loop {
        t += wait.sample(rng);
        if t > horizon {
            break;
        }
        // A zero draw would repeat an instant; skip it.
        if switch_times.last().is_some_and(|&last| t <= last) || t <= 0.0 {
            continue;
        }
        switch_times.push(t);
    }
    Ok(RtnTrajectory { initial_value, switch_times, horizon })
}

/// ∫₀^τ c(s) ds of a sampled trajectory.
pub fn integrate_trajectory(traj: &RtnTrajectory, tau: f64) -> Result<f64> {
    traj.integrate_between(0.0, tau)
}

/// Exported trajectory for cross-implementation comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Root seed; the trajectory is drawn from stream `stream` of it.
    pub seed: u64,
    pub stream: u64,
    pub gamma: f64,
    pub horizon: f64,
    pub initial_value: i8,
    pub switch_times: Vec<f64>,
}

/// `count` trajectories, the i-th drawn from stream i of `seed`.
pub fn trajectory_ensemble(params: &RtnParams, horizon: f64, seed: u64, count: usize) -> Result<Vec<TrajectoryRecord>> {
    (0..count as u64)
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let traj = sample_rtn_trajectory(params, horizon, &mut r)?;
            Ok(TrajectoryRecord {
                seed,
                stream: i,
                gamma: params.gamma,
                horizon,
                initial_value: traj.initial_value,
                switch_times: traj.switch_times,
            })
        })
        .collect()
}
