//! Monte Carlo oracle and estimator studies.
//!
//! The coherence factor of one noise history is exp(−2i∫₀^τ c(s) ds): under
//! the σ_x coupling the two eigenstates pick up opposite phases ±∫c, so the
//! off-diagonal element picks up twice the single-eigenstate phase. With this
//! convention D(τ, γ → 0) = cos 2τ and D → 1 as γ → ∞, as in the closed form.
//!
//! Sample loops are split into fixed-size chunks, chunk k drawing from
//! stream k of the root seed; chunk moments are reduced in chunk order, so
//! results are bit-identical for a given seed regardless of thread count.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::{colored_coefficient, rtn_coefficient, CoefficientMethod, DephasingCoefficient, QubitState};
use crate::error::{domain, Error, Result};
use crate::estimation::{fisher_from_point, DiagonalPoint};
use crate::noise::{integrate_trajectory, sample_rtn_trajectory, sample_switching_rate, ColoredParams, RtnParams};
use crate::optimize::golden_max;
use crate::rng;

pub const MIN_SAMPLES: usize = 1000;
const CHUNK: usize = 4096;

/// Sample mean of cos(phase) with its standard error; the sine average is
/// kept as a symmetry check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over √n.
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub imag_mean: f64,
    pub imag_std_error: f64,
}

impl McEstimate {
    /// |mean − target| in units of the standard error (0 when both vanish).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn agrees_with(&self, target: f64, n_sigma: f64) -> bool {
        self.z_score(target) <= n_sigma
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: [f64; 2],
    sum_sq: [f64; 2],
}

impl Moments {
    fn push(&mut self, re: f64, im: f64) {
        self.n += 1;
        self.sum[0] += re;
        self.sum[1] += im;
        self.sum_sq[0] += re * re;
        self.sum_sq[1] += im * im;
    }

    fn merge(mut self, o: &Self) -> Self {
        self.n += o.n;
        for k in 0..2 {
            self.sum[k] += o.sum[k];
            self.sum_sq[k] += o.sum_sq[k];
        }
        self
    }

    fn mean_se(&self, k: usize) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum[k] / n;
        let var = ((self.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let (mean, std_error) = self.mean_se(0);
        let (imag_mean, imag_std_error) = self.mean_se(1);
        McEstimate { mean, std_error, n_samples: self.n, seed, imag_mean, imag_std_error }
    }
}

/// Runs `sample` n times over chunked streams, reducing in chunk order.
fn run_chunked<F>(n_samples: usize, seed: u64, sample: F) -> Result<Moments>
where
    F: Fn(&mut rng::Stream) -> Result<(f64, f64)> + Sync,
{
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, k as u64);
            let len = CHUNK.min(n_samples - k * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                let (re, im) = sample(&mut r)?;
                m.push(re, im);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold(Moments::default(), |acc, m| acc.merge(m)))
}

fn check_samples(n_samples: usize, tau: f64) -> Result<()> {
    if n_samples < MIN_SAMPLES {
        return domain(format!("Monte Carlo needs at least {MIN_SAMPLES} samples, got {n_samples}"));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return domain(format!("interaction time must be finite and non-negative, got {tau}"));
    }
    Ok(())
}

fn exact_unity(n_samples: usize, seed: u64) -> McEstimate {
    McEstimate { mean: 1.0, std_error: 0.0, n_samples, seed, imag_mean: 0.0, imag_std_error: 0.0 }
}

/// ⟨exp(−2i∫₀^τ c ds)⟩ over event-driven telegraph trajectories.
pub fn mc_rtn_coefficient(params: &RtnParams, tau: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n_samples, tau)?;
    RtnParams::new(params.gamma)?;
    if tau == 0.0 {
        return Ok(exact_unity(n_samples, seed));
    }
    let m = run_chunked(n_samples, seed, |r| {
        let traj = sample_rtn_trajectory(params, tau, r)?;
        let phase = 2.0 * integrate_trajectory(&traj, tau)?;
        Ok((phase.cos(), -phase.sin()))
    })?;
    Ok(m.estimate(seed))
}

/// Phase factor of the summed field of N fluctuators with rates drawn from
/// p_α. By independence its mean is Λ(τ, α)^N.
pub fn mc_colored_coefficient(params: &ColoredParams, tau: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n_samples, tau)?;
    params.validate()?;
    if tau == 0.0 {
        return Ok(exact_unity(n_samples, seed));
    }
    let m = run_chunked(n_samples, seed, |r| {
        let mut total = 0.0;
        for _ in 0..params.n_fluctuators {
            let gamma = sample_switching_rate(params, r)?;
            let traj = sample_rtn_trajectory(&RtnParams { gamma }, tau, r)?;
            total += integrate_trajectory(&traj, tau)?;
        }
        let phase = 2.0 * total;
        Ok((phase.cos(), -phase.sin()))
    })?;
    Ok(m.estimate(seed))
}

/// ∫₀^τ c ds for the trajectory whose waiting times are `units[i] / γ`.
fn scaled_integral(initial: f64, units: &[f64], gamma: f64, tau: f64) -> f64 {
    let mut t = 0.0;
    let mut value = initial;
    let mut acc = 0.0;
    for &e in units {
        let next = t + e / gamma;
        if next >= tau {
            break;
        }
        acc += value * (next - t);
        value = -value;
        t = next;
    }
    acc + value * (tau - t)
}

/// ∂D/∂γ by a central difference of the Monte Carlo average with common
/// random numbers: both rates reuse the same unit-exponential waiting times,
/// so the difference has bounded variance as h → 0.
pub fn mc_rtn_derivative(params: &RtnParams, tau: f64, n_samples: usize, seed: u64, rel_step: f64) -> Result<McEstimate> {
    check_samples(n_samples, tau)?;
    let g = RtnParams::new(params.gamma)?.gamma;
    if !(rel_step > 0.0 && rel_step < 1.0) {
        return domain("relative step must lie in (0, 1)");
    }
    if tau == 0.0 {
        return Ok(McEstimate { mean: 0.0, ..exact_unity(n_samples, seed) });
    }
    let (lo, hi) = (g * (1.0 - rel_step), g * (1.0 + rel_step));
    let m = run_chunked(n_samples, seed, |r| {
        let initial = if r.random::<bool>() { 1.0 } else { -1.0 };
        let mut units = Vec::new();
        let mut elapsed = 0.0;
        // enough waiting times to pass τ at the faster rate
        while elapsed < tau * hi {
            let e: f64 = Exp1.sample(r);
            elapsed += e;
            units.push(e);
        }
        let f = |gamma: f64| {
            let p = 2.0 * scaled_integral(initial, &units, gamma, tau);
            (p.cos(), -p.sin())
        };
        let (a, b) = (f(hi), f(lo));
        let h = hi - lo;
        Ok(((a.0 - b.0) / h, (a.1 - b.1) / h))
    })?;
    Ok(m.estimate(seed))
}

/// Population measurement outcomes (n0, n1) of M shots.
pub fn simulate_population_shots(state: &QubitState, shots: u64, seed: u64) -> Result<(u64, u64)> {
    let mut r = rng::stream(seed, 0);
    shots_from(state.p00, shots, &mut r)
}

fn shots_from<R: Rng + ?Sized>(p00: f64, shots: u64, r: &mut R) -> Result<(u64, u64)> {
    if shots < 1 {
        return domain("at least one shot is required");
    }
    let p = p00.clamp(0.0, 1.0);
    let b = Binomial::new(shots, p).map_err(|e| Error::Domain(e.to_string()))?;
    let n0 = b.sample(r);
    Ok((n0, shots - n0))
}

/// Which dephasing family generated the counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MleFamily {
    /// Parameter γ.
    Rtn,
    /// Parameter α; window and N taken from `params`.
    Colored { params: ColoredParams },
}

impl MleFamily {
    pub fn coefficient(&self, tau: f64, lambda: f64) -> Result<DephasingCoefficient> {
        match self {
            Self::Rtn => rtn_coefficient(tau, &RtnParams::new(lambda)?),
            Self::Colored { params } => {
                colored_coefficient(tau, &params.with_alpha(lambda), CoefficientMethod::Quadrature)
            }
        }
    }

    /// Default search interval around a guess: [γ/2, 2γ] for RTN and the
    /// supported α range for colored noise.
    pub fn default_interval(&self, guess: f64) -> (f64, f64) {
        match self {
            Self::Rtn => (0.5 * guess, 2.0 * guess),
            Self::Colored { .. } => crate::noise::ALPHA_RANGE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub value: f64,
    pub log_likelihood: f64,
    /// The maximizer sits at an end of the search interval.
    pub boundary: bool,
}

const MLE_GRID: usize = 64;

/// Maximizes n0 ln p(λ) + n1 ln(1 − p(λ)), p = (1 + Γ(τ, λ))/2, on an
/// interval.
///
/// When p is strictly monotone on a 64-point scan of the interval the
/// maximizer solves p(λ) = n0/M, found by bisection; otherwise the scan's
/// best point is refined by golden section on the log-likelihood.
pub fn mle_parameter(counts: (u64, u64), tau: f64, family: &MleFamily, interval: (f64, f64)) -> Result<MleEstimate> {
    let (lo, hi) = interval;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return domain(format!("invalid search interval [{lo}, {hi}]"));
    }
    let total = counts.0 + counts.1;
    if total == 0 {
        return domain("no counts to fit");
    }
    let (n0, n1) = (counts.0 as f64, counts.1 as f64);
    let pops = |lambda: f64| -> Result<(f64, f64)> {
        let c = family.coefficient(tau, lambda)?;
        Ok((0.5 * (1.0 + c.value), 0.5 * c.complement))
    };
    let ll = |lambda: f64| -> Result<f64> {
        let (p0, p1) = pops(lambda)?;
        let term = |n: f64, p: f64| if n == 0.0 { 0.0 } else { n * p.max(f64::MIN_POSITIVE).ln() };
        Ok(term(n0, p0) + term(n1, p1))
    };
    // Log spacing for a rate, linear for an exponent.
    let log_grid = matches!(family, MleFamily::Rtn);
    let node = |i: usize| {
        let s = i as f64 / (MLE_GRID - 1) as f64;
        if log_grid {
            lo * (hi / lo).powf(s)
        } else {
            lo + s * (hi - lo)
        }
    };
    let p_grid: Vec<f64> = (0..MLE_GRID).map(|i| pops(node(i)).map(|p| p.0)).collect::<Result<_>>()?;
    let rising = p_grid.windows(2).all(|w| w[1] > w[0]);
    let falling = p_grid.windows(2).all(|w| w[1] < w[0]);
    if rising || falling {
        let target = n0 / total as f64;
        let sign = if rising { 1.0 } else { -1.0 };
        let (p_lo, p_hi) = (p_grid[0], p_grid[MLE_GRID - 1]);
        if sign * (target - p_lo) <= 0.0 {
            return Ok(MleEstimate { value: lo, log_likelihood: ll(lo)?, boundary: true });
        }
        if sign * (target - p_hi) >= 0.0 {
            return Ok(MleEstimate { value: hi, log_likelihood: ll(hi)?, boundary: true });
        }
        let i = p_grid.partition_point(|&p| sign * (p - target) < 0.0);
        let (mut a, mut b) = (node(i - 1), node(i));
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if sign * (pops(m)?.0 - target) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let value = 0.5 * (a + b);
        return Ok(MleEstimate { value, log_likelihood: ll(value)?, boundary: false });
    }
    let values: Vec<f64> = (0..MLE_GRID).map(|i| ll(node(i))).collect::<Result<_>>()?;
    let best = values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if best == 0 || best == MLE_GRID - 1 {
        return Ok(MleEstimate { value: node(best), log_likelihood: values[best], boundary: true });
    }
    let (value, log_likelihood) = golden_max(ll, node(best - 1), node(best + 1), 1e-10 * (hi - lo))?;
    let (value, log_likelihood) =
        if values[best] > log_likelihood { (node(best), values[best]) } else { (value, log_likelihood) };
    Ok(MleEstimate { value, log_likelihood, boundary: false })
}

/// Seed bookkeeping for a study: repetition i draws from stream i of
/// `root_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub root_seed: u64,
    pub generator: String,
    pub substreams: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStudy {
    pub family: MleFamily,
    pub true_parameter: f64,
    pub tau: f64,
    pub shots_per_experiment: u64,
    pub n_repetitions: usize,
    pub search_interval: (f64, f64),
    pub empirical_mean: f64,
    /// Unbiased sample variance of the estimates.
    pub empirical_variance: f64,
    pub bias: f64,
    pub mse: f64,
    pub fisher: f64,
    /// 1/(M F).
    pub cr_bound: f64,
    pub variance_ratio: f64,
    pub boundary_count: usize,
    /// False when more than 1% of the estimates hit the interval edge.
    pub valid: bool,
    pub lineage: SeedLineage,
}

/// Repeats M-shot experiments at (true_parameter, τ), fits each by maximum
/// likelihood and compares the estimator variance with 1/(M F).
pub fn cr_saturation_study(
    family: &MleFamily,
    true_parameter: f64,
    tau: f64,
    shots: u64,
    n_repetitions: usize,
    seed: u64,
) -> Result<EstimatorStudy> {
    cr_saturation_study_in(family, true_parameter, tau, shots, n_repetitions, seed, family.default_interval(true_parameter))
}

pub fn cr_saturation_study_in(
    family: &MleFamily,
    true_parameter: f64,
    tau: f64,
    shots: u64,
    n_repetitions: usize,
    seed: u64,
    interval: (f64, f64),
) -> Result<EstimatorStudy> {
    if n_repetitions < 2 {
        return domain("a variance study needs at least two repetitions");
    }
    let coeff = family.coefficient(tau, true_parameter)?;
    let fisher = fisher_from_point(&DiagonalPoint::dephasing(&coeff, 0.0));
    let p00 = 0.5 * (1.0 + coeff.value);
    let estimates: Vec<MleEstimate> = (0..n_repetitions)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let counts = shots_from(p00, shots, &mut r)?;
            mle_parameter(counts, tau, family, interval)
        })
        .collect::<Result<_>>()?;
    let n = n_repetitions as f64;
    let mean = estimates.iter().map(|e| e.value).sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e.value - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mse = estimates.iter().map(|e| (e.value - true_parameter).powi(2)).sum::<f64>() / n;
    let boundary_count = estimates.iter().filter(|e| e.boundary).count();
    let cr_bound = 1.0 / (shots as f64 * fisher);
    Ok(EstimatorStudy {
        family: *family,
        true_parameter,
        tau,
        shots_per_experiment: shots,
        n_repetitions,
        search_interval: interval,
        empirical_mean: mean,
        empirical_variance: var,
        bias: mean - true_parameter,
        mse,
        fisher,
        cr_bound,
        variance_ratio: var / cr_bound,
        boundary_count,
        valid: boundary_count as f64 <= 0.01 * n,
        lineage: SeedLineage {
            root_seed: seed,
            generator: "ChaCha8".into(),
            substreams: "repetition i uses stream i of the root seed".into(),
        },
    })
}
