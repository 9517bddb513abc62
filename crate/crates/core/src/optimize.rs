//! Maximization of the quantum Fisher information over the interaction time,
//! the H ≈ a/γ² scaling fit, QSNR profiles in α and the N_max scan.
//!
//! Every optimum is a coarse grid scan followed by golden-section refinement
//! of the best few local maxima. Sweeps run in parallel with rayon; results
//! are collected in grid order so output never depends on scheduling.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::{lambda_quadrature, power, rtn_coefficient, DephasingCoefficient};
use crate::error::{domain, Result};
use crate::estimation::{qfi_dephasing, qfi_rtn, EstimationReport};
use crate::noise::{ColoredParams, RtnParams};

/// Default fluctuator range for [`nmax_scan`].
pub const NMAX_RANGE: (u32, u32) = (1, 600);

/// How many coarse local maxima are refined.
const REFINED_CANDIDATES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub tau_min: f64,
    /// Upper end of the τ window; `None` picks a regime-dependent default.
    pub tau_max: Option<f64>,
    /// Coarse grid spacing.
    pub step: f64,
    /// Golden-section tolerance on τ.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { tau_min: 1e-3, tau_max: None, step: PI / 40.0, tol: 1e-6 }
    }
}

impl SearchConfig {
    /// Window [1e−3, 4π] with step π/80, used for colored noise.
    pub fn colored() -> Self {
        Self { tau_min: 1e-3, tau_max: Some(4.0 * PI), step: PI / 80.0, tol: 1e-6 }
    }

    fn validate(&self, tau_max: f64) -> Result<()> {
        if !(self.tau_min > 0.0 && tau_max > self.tau_min && tau_max.is_finite()) {
            return domain(format!("search window [{}, {tau_max}] is empty or unbounded", self.tau_min));
        }
        if !(self.step > 0.0) || self.step > PI / 20.0 {
            return domain(format!("grid step must lie in (0, pi/20], got {}", self.step));
        }
        if !(self.tol > 0.0) {
            return domain("refinement tolerance must be positive");
        }
        Ok(())
    }

    /// τ_max for RTN: at least 4π, 10γ (the fast-branch optimum grows as
    /// 2γ/5) and 3π/(2γ) (three times the slow-branch staircase).
    pub fn rtn_tau_max(&self, gamma: f64) -> f64 {
        self.tau_max.unwrap_or_else(|| (4.0 * PI).max(10.0 * gamma).max(1.5 * PI / gamma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchMeta {
    pub tau_min: f64,
    pub tau_max: f64,
    pub step: f64,
    pub tol: f64,
    pub coarse_points: usize,
    /// The coarse maximum sat on the window edge.
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumRecord {
    /// γ for RTN, α for colored noise.
    pub parameter: f64,
    pub n_fluctuators: Option<u32>,
    pub tau_opt: f64,
    pub qfi_max: f64,
    pub qsnr_max: f64,
    pub search: SearchMeta,
}

fn coarse_grid(tau_min: f64, tau_max: f64, step: f64) -> Vec<f64> {
    let n = ((tau_max - tau_min) / step).ceil() as usize;
    let mut g: Vec<f64> = (0..n).map(|i| tau_min + i as f64 * step).collect();
    g.push(tau_max);
    g
}

/// Indices of local maxima; an endpoint counts when it exceeds its neighbor.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    if n == 1 {
        return vec![0];
    }
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] > values[i - 1];
            let right = i + 1 == n || values[i] >= values[i + 1];
            left && right && (i > 0 || values[0] > values[1])
        })
        .collect()
}

/// Golden-section search for the maximum of a unimodal f on [a, b].
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Refines the best coarse local maxima of `values` on `grid`.
fn refine<F>(f: &F, grid: &[f64], values: &[f64], tol: f64) -> Result<(f64, f64, bool)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let best = values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let boundary = best == 0 || best + 1 == grid.len();
    let mut candidates = local_maxima(values);
    candidates.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    candidates.truncate(REFINED_CANDIDATES);
    let refined: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&i| {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            golden_max(f, lo, hi, tol)
        })
        .collect::<Result<_>>()?;
    let mut out = (grid[best], values[best]);
    for (t, v) in refined {
        if v > out.1 {
            out = (t, v);
        }
    }
    Ok((out.0, out.1, boundary))
}

fn maximize<F>(f: F, tau_min: f64, tau_max: f64, step: f64, tol: f64) -> Result<(f64, f64, SearchMeta)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = coarse_grid(tau_min, tau_max, step);
    let values: Vec<f64> = grid.par_iter().map(|&t| f(t)).collect::<Result<_>>()?;
    let (tau, value, boundary) = refine(&f, &grid, &values, tol)?;
    let meta = SearchMeta { tau_min, tau_max, step, tol, coarse_points: grid.len(), boundary };
    Ok((tau, value, meta))
}

/// τ maximizing H(τ, γ) for random telegraph noise.
pub fn optimal_time_rtn(params: &RtnParams, search: &SearchConfig) -> Result<OptimumRecord> {
    let gamma = RtnParams::new(params.gamma)?.gamma;
    let tau_max = search.rtn_tau_max(gamma);
    search.validate(tau_max)?;
    let h = |t: f64| qfi_dephasing(&rtn_coefficient(t, params)?, 0.0);
    let (tau_opt, qfi_max, meta) = maximize(h, search.tau_min, tau_max, search.step, search.tol)?;
    Ok(OptimumRecord {
        parameter: gamma,
        n_fluctuators: None,
        tau_opt,
        qfi_max,
        qsnr_max: gamma * gamma * qfi_max,
        search: meta,
    })
}

/// nint[1/(2γ)]·π/2 for γ < 2 and 2γ/5 otherwise.
///
/// nint rounds half-integers up and is clamped to at least 1, so rates in
/// (1, 2) map to the first peak at π/2 rather than to τ = 0.
pub fn approx_optimal_time_rtn(params: &RtnParams) -> f64 {
    let g = params.gamma;
    if g < 2.0 {
        let n = (0.5 / g + 0.5).floor().max(1.0);
        n * FRAC_PI_2
    } else {
        0.4 * g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope of ln H(τ_opt, γ) against ln γ.
    pub exponent: f64,
    /// e^{intercept}, so H ≈ a γ^{exponent}.
    pub coefficient_a: f64,
    pub points_used: usize,
    /// Rates whose optimum sat on the window edge, left out of the fit.
    pub excluded: Vec<f64>,
    pub qsnr_min: f64,
    pub qsnr_max: f64,
    pub records: Vec<OptimumRecord>,
}

impl ScalingFit {
    pub fn qsnr_spread(&self) -> f64 {
        self.qsnr_max / self.qsnr_min
    }
}

/// Least-squares fit of ln H(τ_opt(γ), γ) = ln a + s ln γ.
pub fn fit_qfi_scaling(gamma_grid: &[f64], search: &SearchConfig) -> Result<ScalingFit> {
    if gamma_grid.len() < 20 {
        return domain(format!("scaling fit needs at least 20 rates, got {}", gamma_grid.len()));
    }
    let (lo, hi) = gamma_grid.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &g| (l.min(g), h.max(g)));
    if !(lo > 0.0) || (hi / lo).log10() < 4.0 - 1e-9 {
        return domain(format!("scaling fit needs rates spanning 4 decades, got [{lo}, {hi}]"));
    }
    let records: Vec<OptimumRecord> = gamma_grid
        .par_iter()
        .map(|&g| optimal_time_rtn(&RtnParams::new(g)?, search))
        .collect::<Result<_>>()?;
    let (used, excluded): (Vec<&OptimumRecord>, Vec<&OptimumRecord>) =
        records.iter().partition(|r| !r.search.boundary && r.qfi_max.is_finite() && r.qfi_max > 0.0);
    if used.len() < 2 {
        return domain("fewer than two usable optima for the scaling fit");
    }
    let pts: Vec<(f64, f64)> = used.iter().map(|r| (r.parameter.ln(), r.qfi_max.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let qsnr = used.iter().map(|r| r.qsnr_max);
    Ok(ScalingFit {
        exponent: slope,
        coefficient_a: intercept.exp(),
        points_used: used.len(),
        excluded: excluded.iter().map(|r| r.parameter).collect(),
        qsnr_min: qsnr.clone().fold(f64::INFINITY, f64::min),
        qsnr_max: qsnr.fold(0.0, f64::max),
        records,
    })
}

/// H(τ, γ) on a τ × γ grid, rows ordered τ-major.
pub fn rtn_qfi_surface(taus: &[f64], gammas: &[f64]) -> Result<Vec<EstimationReport>> {
    let params: Vec<RtnParams> = gammas.iter().map(|&g| RtnParams::new(g)).collect::<Result<_>>()?;
    taus.par_iter()
        .flat_map_iter(|&t| params.iter().map(move |p| qfi_rtn(t, p)))
        .collect()
}

/// Λ(τ, α) and ∂Λ/∂α tabulated on a τ grid for one (α, window). Since
/// H(τ, α, N) depends on N only through Λ^N, one table serves every N.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    pub params: ColoredParams,
    pub taus: Vec<f64>,
    pub lambdas: Vec<DephasingCoefficient>,
}

impl LambdaTable {
    pub fn new(params: &ColoredParams, taus: Vec<f64>) -> Result<Self> {
        params.validate()?;
        let lambdas = taus
            .par_iter()
            .map(|&t| lambda_quadrature(t, &params.with_n(1)))
            .collect::<Result<_>>()?;
        Ok(Self { params: *params, taus, lambdas })
    }

    pub fn qfi(&self, i: usize, n: u32) -> Result<f64> {
        qfi_dephasing(&power(self.lambdas[i], n), 0.0)
    }

    pub fn qfi_row(&self, n: u32) -> Result<Vec<f64>> {
        (0..self.taus.len()).map(|i| self.qfi(i, n)).collect()
    }
}

fn colored_qfi_at(tau: f64, params: &ColoredParams) -> Result<f64> {
    let single = lambda_quadrature(tau, &params.with_n(1))?;
    qfi_dephasing(&power(single, params.n_fluctuators), 0.0)
}

fn colored_window(search: &SearchConfig) -> Result<(f64, f64)> {
    let tau_max = search.tau_max.unwrap_or(4.0 * PI);
    search.validate(tau_max)?;
    Ok((search.tau_min, tau_max))
}

fn optimum_from_table(table: &LambdaTable, n: u32, search: &SearchConfig) -> Result<OptimumRecord> {
    let params = table.params.with_n(n);
    let values = table.qfi_row(n)?;
    let f = |t: f64| colored_qfi_at(t, &params);
    let (tau_opt, qfi_max, boundary) = refine(&f, &table.taus, &values, search.tol)?;
    let (tau_min, tau_max) = (table.taus[0], *table.taus.last().unwrap_or(&table.taus[0]));
    Ok(OptimumRecord {
        parameter: params.alpha,
        n_fluctuators: Some(n),
        tau_opt,
        qfi_max,
        qsnr_max: params.alpha * params.alpha * qfi_max,
        search: SearchMeta { tau_min, tau_max, step: search.step, tol: search.tol, coarse_points: table.taus.len(), boundary },
    })
}

fn table_for(params: &ColoredParams, search: &SearchConfig) -> Result<LambdaTable> {
    let (tau_min, tau_max) = colored_window(search)?;
    LambdaTable::new(params, coarse_grid(tau_min, tau_max, search.step))
}

/// τ maximizing H(τ, α, N) for colored noise.
pub fn optimal_time_colored(params: &ColoredParams, search: &SearchConfig) -> Result<OptimumRecord> {
    let table = table_for(params, search)?;
    optimum_from_table(&table, params.n_fluctuators, search)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsnrProfile {
    pub n_fluctuators: u32,
    pub records: Vec<OptimumRecord>,
    /// Indices into `records` of local maxima of qsnr_max.
    pub local_maxima: Vec<usize>,
}

impl QsnrProfile {
    pub fn qsnr(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.qsnr_max).collect()
    }

    /// Local maxima sorted by decreasing QSNR.
    pub fn ranked_maxima(&self) -> Vec<&OptimumRecord> {
        let mut m: Vec<&OptimumRecord> = self.local_maxima.iter().map(|&i| &self.records[i]).collect();
        m.sort_by(|a, b| b.qsnr_max.total_cmp(&a.qsnr_max));
        m
    }
}

/// max_τ R(τ, α, N) = α² H along an α grid, for several N at once.
pub fn qsnr_profiles(alpha_grid: &[f64], ns: &[u32], window: (f64, f64), search: &SearchConfig) -> Result<Vec<QsnrProfile>> {
    if alpha_grid.is_empty() || ns.is_empty() {
        return domain("profile grids must be non-empty");
    }
    let tables: Vec<LambdaTable> = alpha_grid
        .iter()
        .map(|&a| table_for(&ColoredParams::new(a, window.0, window.1, 1)?, search))
        .collect::<Result<_>>()?;
    ns.iter()
        .map(|&n| {
            let records: Vec<OptimumRecord> =
                tables.par_iter().map(|t| optimum_from_table(t, n, search)).collect::<Result<_>>()?;
            let q: Vec<f64> = records.iter().map(|r| r.qsnr_max).collect();
            Ok(QsnrProfile { n_fluctuators: n, local_maxima: local_maxima(&q), records })
        })
        .collect()
}

pub fn qsnr_profile(alpha_grid: &[f64], n_fluctuators: u32, window: (f64, f64), search: &SearchConfig) -> Result<QsnrProfile> {
    Ok(qsnr_profiles(alpha_grid, &[n_fluctuators], window, search)?.remove(0))
}

/// R(τ, α, N) on a τ × α grid, rows ordered τ-major.
pub fn colored_qsnr_surface(taus: &[f64], alphas: &[f64], n: u32, window: (f64, f64)) -> Result<Vec<EstimationReport>> {
    let tables: Vec<LambdaTable> = alphas
        .iter()
        .map(|&a| LambdaTable::new(&ColoredParams::new(a, window.0, window.1, n)?, taus.to_vec()))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(taus.len() * alphas.len());
    for (i, &t) in taus.iter().enumerate() {
        for table in &tables {
            let c = power(table.lambdas[i], n);
            out.push(EstimationReport::from_coefficient(table.params.alpha, t, &c)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmaxResult {
    pub alpha: f64,
    pub n_max: u32,
    pub record: OptimumRecord,
    /// The maximizing N is an end of the scanned range.
    pub boundary: bool,
    /// (N, coarse-grid max_τ H) for every scanned N.
    pub coarse: Vec<(u32, f64)>,
}

/// Integer N in `n_range` maximizing max_τ H(τ, α, N); ties go to smaller N.
pub fn nmax_scan(alpha: f64, n_range: (u32, u32), window: (f64, f64), search: &SearchConfig) -> Result<NmaxResult> {
    let (lo, hi) = n_range;
    if lo < 1 || lo > hi {
        return domain(format!("fluctuator range [{lo}, {hi}] is empty"));
    }
    let params = ColoredParams::new(alpha, window.0, window.1, 1)?;
    let table = table_for(&params, search)?;
    let coarse: Vec<(u32, f64)> = (lo..=hi)
        .into_par_iter()
        .map(|n| Ok((n, table.qfi_row(n)?.into_iter().fold(0.0, f64::max))))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..coarse.len()).collect();
    order.sort_by(|&i, &j| coarse[j].1.total_cmp(&coarse[i].1).then(i.cmp(&j)));
    order.truncate(REFINED_CANDIDATES);
    let refined: Vec<OptimumRecord> =
        order.iter().map(|&i| optimum_from_table(&table, coarse[i].0, search)).collect::<Result<_>>()?;
    let mut best = refined[0];
    for r in &refined[1..] {
        let (n_r, n_b) = (r.n_fluctuators.unwrap_or(0), best.n_fluctuators.unwrap_or(0));
        if r.qfi_max > best.qfi_max || (r.qfi_max == best.qfi_max && n_r < n_b) {
            best = *r;
        }
    }
    let n_max = best.n_fluctuators.unwrap_or(lo);
    Ok(NmaxResult { alpha, n_max, record: best, boundary: n_max == lo && lo > 1 || n_max == hi, coarse })
}
