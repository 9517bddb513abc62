use std::f64::consts::{FRAC_PI_4, PI};
use std::path::PathBuf;

use serde::Serialize;

use qprobe::montecarlo::{cr_saturation_study_in, mc_rtn_coefficient, MleFamily};
use qprobe::noise::{ColoredParams, RtnParams, DEFAULT_WINDOW};
use qprobe::optimize::{
    approx_optimal_time_rtn, nmax_scan, optimal_time_colored, optimal_time_rtn, qsnr_profiles, rtn_qfi_surface,
    LambdaTable, SearchConfig, NMAX_RANGE,
};
use qprobe::rng::derive_seed;
use qprobe::validate::{run_validation, ClosedFormRtn, ValidationConfig};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{encode_json, write_atomic, write_rows};

pub enum Status {
    Ok,
    ValidationFailed,
}

pub struct Outcome {
    pub status: Status,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    fn ok(written: Vec<PathBuf>) -> Self {
        Self { status: Status::Ok, written }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn default_alphas() -> Vec<f64> {
    linspace(0.5, 2.0, 31)
}

fn positive(name: &str, v: &[f64]) -> Result<(), CliError> {
    match v.iter().find(|&&x| !(x > 0.0)) {
        Some(x) => Err(CliError::Config(format!("{name} values must be positive, got {x}"))),
        None => Ok(()),
    }
}

fn window(cfg: &RunConfig) -> (f64, f64) {
    cfg.window.unwrap_or(DEFAULT_WINDOW)
}

#[derive(Serialize)]
struct SurfaceRow {
    tau: f64,
    gamma: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "QSNR")]
    qsnr: f64,
}

pub fn rtn_qfi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let taus = cfg.tau_grid.clone().unwrap_or_else(|| linspace(0.01, 4.0 * PI, 400));
    let gammas = cfg.gamma.clone().unwrap_or_else(|| vec![0.1, 0.25, 0.5, 1.0, 2.5, 5.0]);
    positive("gamma", &gammas)?;
    positive("tau", &taus)?;
    let rows: Vec<SurfaceRow> = rtn_qfi_surface(&taus, &gammas)?
        .into_iter()
        .map(|r| SurfaceRow { tau: r.interaction_time, gamma: r.parameter_value, h: r.qfi, qsnr: r.qsnr })
        .collect();
    Ok(Outcome::ok(vec![write_rows(&cfg.out, "fig1_surface", cfg.format, &rows)?]))
}

#[derive(Serialize)]
struct StaircaseRow {
    gamma: f64,
    tau_opt: f64,
    #[serde(rename = "H_max")]
    h_max: f64,
    #[serde(rename = "QSNR_max")]
    qsnr_max: f64,
    tau_approx: f64,
    pi_over_4gamma: f64,
    /// |tau_opt − tau_approx| / tau_approx.
    deviation: f64,
    boundary: bool,
}

pub fn optimal_time(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gammas = match &cfg.gamma {
        Some(g) => g.clone(),
        None => (0..=200).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 200.0)).collect(),
    };
    positive("gamma", &gammas)?;
    let search = SearchConfig::default();
    let rows = gammas
        .iter()
        .map(|&g| {
            let p = RtnParams::new(g)?;
            let r = optimal_time_rtn(&p, &search)?;
            let approx = approx_optimal_time_rtn(&p);
            Ok(StaircaseRow {
                gamma: g,
                tau_opt: r.tau_opt,
                h_max: r.qfi_max,
                qsnr_max: r.qsnr_max,
                tau_approx: approx,
                pi_over_4gamma: FRAC_PI_4 / g,
                deviation: (r.tau_opt - approx).abs() / approx,
                boundary: r.search.boundary,
            })
        })
        .collect::<Result<Vec<_>, qprobe::Error>>()?;
    Ok(Outcome::ok(vec![write_rows(&cfg.out, "fig2_staircase", cfg.format, &rows)?]))
}

#[derive(Serialize)]
struct ColoredSurfaceRow {
    #[serde(rename = "N")]
    n: u32,
    tau: f64,
    alpha: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "QSNR")]
    qsnr: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    alpha: f64,
    #[serde(rename = "N")]
    n: u32,
    tau_opt: f64,
    #[serde(rename = "H_max")]
    h_max: f64,
    #[serde(rename = "QSNR_max")]
    qsnr_max: f64,
    local_max: bool,
}

#[derive(Serialize)]
struct NmaxRow {
    alpha: f64,
    #[serde(rename = "N_max")]
    n_max: u32,
    tau_opt: f64,
    #[serde(rename = "H_max")]
    h_max: f64,
    #[serde(rename = "QSNR_max")]
    qsnr_max: f64,
    boundary: bool,
}

fn nmax_rows(alphas: &[f64], range: (u32, u32), win: (f64, f64)) -> Result<Vec<NmaxRow>, CliError> {
    let search = SearchConfig::colored();
    alphas
        .iter()
        .map(|&a| {
            let r = nmax_scan(a, range, win, &search)?;
            Ok(NmaxRow {
                alpha: a,
                n_max: r.n_max,
                tau_opt: r.record.tau_opt,
                h_max: r.record.qfi_max,
                qsnr_max: r.record.qsnr_max,
                boundary: r.boundary,
            })
        })
        .collect()
}

pub fn colored_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let alphas = cfg.alpha.clone().unwrap_or_else(default_alphas);
    let ns = cfg.n_fluctuators.clone().unwrap_or_else(|| vec![1, 10, 50]);
    let taus = cfg.tau_grid.clone().unwrap_or_else(|| linspace(0.02, 4.0 * PI, 160));
    positive("tau", &taus)?;
    let win = window(cfg);

    let mut surface = Vec::with_capacity(ns.len() * taus.len() * alphas.len());
    let tables: Vec<LambdaTable> = alphas
        .iter()
        .map(|&a| LambdaTable::new(&ColoredParams::new(a, win.0, win.1, 1)?, taus.clone()))
        .collect::<Result<_, qprobe::Error>>()?;
    for &n in &ns {
        for (i, &t) in taus.iter().enumerate() {
            for table in &tables {
                let a = table.params.alpha;
                let h = table.qfi(i, n)?;
                surface.push(ColoredSurfaceRow { n, tau: t, alpha: a, h, qsnr: a * a * h });
            }
        }
    }

    let profiles = qsnr_profiles(&alphas, &ns, win, &SearchConfig::colored())?;
    let mut profile_rows = Vec::new();
    for p in &profiles {
        for (i, r) in p.records.iter().enumerate() {
            profile_rows.push(ProfileRow {
                alpha: r.parameter,
                n: p.n_fluctuators,
                tau_opt: r.tau_opt,
                h_max: r.qfi_max,
                qsnr_max: r.qsnr_max,
                local_max: p.local_maxima.contains(&i),
            });
        }
    }

    let nmax = nmax_rows(&alphas, NMAX_RANGE, win)?;
    Ok(Outcome::ok(vec![
        write_rows(&cfg.out, "fig3_qsnr_surface", cfg.format, &surface)?,
        write_rows(&cfg.out, "fig4_profiles", cfg.format, &profile_rows)?,
        write_rows(&cfg.out, "fig5_nmax", cfg.format, &nmax)?,
    ]))
}

pub fn nmax(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let alphas = cfg.alpha.clone().unwrap_or_else(default_alphas);
    let range = match &cfg.n_fluctuators {
        Some(ns) => (*ns.iter().min().unwrap_or(&1), *ns.iter().max().unwrap_or(&1)),
        None => NMAX_RANGE,
    };
    let rows = nmax_rows(&alphas, range, window(cfg))?;
    Ok(Outcome::ok(vec![write_rows(&cfg.out, "fig5_nmax", cfg.format, &rows)?]))
}

#[derive(Serialize)]
struct McRow {
    gamma: f64,
    tau: f64,
    #[serde(rename = "D")]
    d: f64,
    mc_mean: f64,
    mc_std_error: f64,
    z: f64,
    passed: bool,
    seed: u64,
}

pub fn mc_validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let defaults = ValidationConfig::default();
    let gammas = cfg.gamma.clone().unwrap_or(defaults.gammas);
    let taus = cfg.tau_grid.clone().unwrap_or(defaults.taus);
    let samples = cfg.samples.unwrap_or(defaults.value_samples);
    let root = cfg.seed.unwrap_or(defaults.seed);
    positive("gamma", &gammas)?;
    let mut rows = Vec::new();
    for &g in &gammas {
        for &t in &taus {
            let p = RtnParams::new(g)?;
            let seed = derive_seed(root, rows.len() as u64);
            let d = qprobe::dephasing::rtn_coefficient(t, &p)?.value;
            let mc = mc_rtn_coefficient(&p, t, samples, seed)?;
            rows.push(McRow {
                gamma: g,
                tau: t,
                d,
                mc_mean: mc.mean,
                mc_std_error: mc.std_error,
                z: mc.z_score(d),
                passed: mc.agrees_with(d, defaults.n_sigma),
                seed,
            });
        }
    }
    let status = if rows.iter().all(|r| r.passed) { Status::Ok } else { Status::ValidationFailed };
    Ok(Outcome { status, written: vec![write_rows(&cfg.out, "mc_validation", cfg.format, &rows)?] })
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = ValidationConfig::default();
    let vc = ValidationConfig {
        seed: cfg.seed.unwrap_or(d.seed),
        gammas: cfg.gamma.clone().unwrap_or(d.gammas),
        taus: cfg.tau_grid.clone().unwrap_or(d.taus),
        value_samples: cfg.samples.unwrap_or(d.value_samples),
        derivative_samples: cfg.samples.unwrap_or(d.derivative_samples),
        cr_shots: cfg.shots.unwrap_or(d.cr_shots),
        cr_repetitions: cfg.repetitions.unwrap_or(d.cr_repetitions),
        ..d
    };
    positive("gamma", &vc.gammas)?;
    let report = run_validation(&ClosedFormRtn, &vc)?;
    let path = match cfg.format {
        Format::Json => write_atomic(&cfg.out, "validation_report", cfg.format, &encode_json(&report)?)?,
        Format::Csv => write_rows(&cfg.out, "validation_report", cfg.format, &report.checks)?,
    };
    let status = if report.passed { Status::Ok } else { Status::ValidationFailed };
    Ok(Outcome { status, written: vec![path] })
}

#[derive(Serialize)]
struct StudyRow {
    family: &'static str,
    true_parameter: f64,
    tau: f64,
    shots: u64,
    repetitions: usize,
    empirical_mean: f64,
    empirical_variance: f64,
    bias: f64,
    mse: f64,
    fisher: f64,
    cr_bound: f64,
    variance_ratio: f64,
    boundary_count: usize,
    valid: bool,
    seed: u64,
}

pub fn estimate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seed = cfg.seed.unwrap_or(ValidationConfig::default().seed);
    let shots = cfg.shots.unwrap_or(10_000);
    let reps = cfg.repetitions.unwrap_or(1000);
    let (family, truth, tau) = match &cfg.alpha {
        Some(alphas) => {
            let n = cfg.n_fluctuators.as_ref().map_or(1, |v| v[0]);
            let win = window(cfg);
            let params = ColoredParams::new(alphas[0], win.0, win.1, n)?;
            let tau = match cfg.tau {
                Some(t) => t,
                None => optimal_time_colored(&params, &SearchConfig::colored())?.tau_opt,
            };
            (MleFamily::Colored { params }, alphas[0], tau)
        }
        None => {
            let g = cfg.gamma.as_ref().map_or(1.0, |v| v[0]);
            let tau = match cfg.tau {
                Some(t) => t,
                None => optimal_time_rtn(&RtnParams::new(g)?, &SearchConfig::default())?.tau_opt,
            };
            (MleFamily::Rtn, g, tau)
        }
    };
    if !(tau > 0.0) {
        return Err(CliError::Config(format!("tau must be positive, got {tau}")));
    }
    let study = cr_saturation_study_in(&family, truth, tau, shots, reps, seed, family.default_interval(truth))?;
    let path = match cfg.format {
        Format::Json => write_atomic(&cfg.out, "estimator_study", cfg.format, &encode_json(&study)?)?,
        Format::Csv => {
            let row = StudyRow {
                family: match family {
                    MleFamily::Rtn => "rtn",
                    MleFamily::Colored { .. } => "colored",
                },
                true_parameter: truth,
                tau,
                shots,
                repetitions: reps,
                empirical_mean: study.empirical_mean,
                empirical_variance: study.empirical_variance,
                bias: study.bias,
                mse: study.mse,
                fisher: study.fisher,
                cr_bound: study.cr_bound,
                variance_ratio: study.variance_ratio,
                boundary_count: study.boundary_count,
                valid: study.valid,
                seed,
            };
            write_rows(&cfg.out, "estimator_study", cfg.format, &[row])?
        }
    };
    Ok(Outcome::ok(vec![path]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn slow_staircase_levels_are_multiples_of_half_pi() {
        for &g in &[0.05, 0.15, 0.3, 0.6] {
            let p = RtnParams::new(g).unwrap();
            let k = approx_optimal_time_rtn(&p) / FRAC_PI_2;
            assert!((k - k.round()).abs() < 1e-12 && k >= 1.0);
        }
    }
}
