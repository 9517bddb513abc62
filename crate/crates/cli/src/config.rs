//! Run configuration: command-line flags layered over an optional JSON
//! config file, layered over per-command defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "QPROBE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// Flags shared by every subcommand. Grids accept `a,b,c`, `start:stop:count`
/// (linear, inclusive) or `log:start:stop:count`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Switching rate(s) γ.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Spectral exponent(s) α.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Fluctuator count(s) N.
    #[arg(long = "n-fluctuators")]
    pub n_fluctuators: Option<String>,
    /// Switching-rate window γ1,γ2 for colored noise.
    #[arg(long)]
    pub window: Option<String>,
    /// Interaction-time grid.
    #[arg(long = "tau-grid")]
    pub tau_grid: Option<String>,
    /// Single interaction time (estimate); defaults to the optimum.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trajectories per point.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Measurement shots per simulated experiment.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Output directory; defaults to $QPROBE_OUT_DIR, then the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the above keys (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gamma: Option<GridSpec>,
    pub alpha: Option<GridSpec>,
    pub n_fluctuators: Option<GridSpec>,
    pub window: Option<(f64, f64)>,
    pub tau_grid: Option<GridSpec>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub shots: Option<u64>,
    pub repetitions: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Merged settings; each command fills what is still unset from its defaults.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub gamma: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub n_fluctuators: Option<Vec<u32>>,
    pub window: Option<(f64, f64)>,
    pub tau_grid: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub shots: Option<u64>,
    pub repetitions: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let grid = |name: &str, flag: &Option<String>, file: &Option<GridSpec>| -> Result<Option<Vec<f64>>, CliError> {
            match (flag, file) {
                (Some(s), _) => parse_grid(name, s).map(Some),
                (None, Some(GridSpec::Text(s))) => parse_grid(name, s).map(Some),
                (None, Some(GridSpec::Values(v))) => check_values(name, v.clone()).map(Some),
                (None, None) => Ok(None),
            }
        };
        let n_fluctuators = grid("n-fluctuators", &flags.n_fluctuators, &file.n_fluctuators)?
            .map(|v| v.into_iter().map(to_count).collect::<Result<Vec<u32>, _>>())
            .transpose()?;
        let window = match &flags.window {
            Some(s) => Some(parse_window(s)?),
            None => file.window,
        };
        if let Some((a, b)) = window {
            if !(a > 0.0 && a <= b && b.is_finite()) {
                return Err(CliError::Config(format!("window must satisfy 0 < g1 <= g2 < inf, got ({a}, {b})")));
            }
        }
        let out = flags
            .out
            .clone()
            .or(file.out)
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self {
            gamma: grid("gamma", &flags.gamma, &file.gamma)?,
            alpha: grid("alpha", &flags.alpha, &file.alpha)?,
            n_fluctuators,
            window,
            tau_grid: grid("tau-grid", &flags.tau_grid, &file.tau_grid)?,
            tau: flags.tau.or(file.tau),
            seed: flags.seed.or(file.seed),
            samples: flags.samples.or(file.samples),
            shots: flags.shots.or(file.shots),
            repetitions: flags.repetitions.or(file.repetitions),
            out,
            format: flags.format.or(file.format).unwrap_or_default(),
        })
    }
}

fn to_count(x: f64) -> Result<u32, CliError> {
    if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
        Ok(x as u32)
    } else {
        Err(CliError::Config(format!("fluctuator counts must be positive integers, got {x}")))
    }
}

fn number(name: &str, s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{name}: cannot parse {s:?} as a number")))
}

fn check_values(name: &str, v: Vec<f64>) -> Result<Vec<f64>, CliError> {
    if v.is_empty() {
        return Err(CliError::Config(format!("{name}: grid is empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(CliError::Config(format!("{name}: non-finite grid value {x}")));
    }
    Ok(v)
}

pub fn parse_grid(name: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::Config(format!("{name}: grid is empty")));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let range = |a: &str, b: &str, n: &str| -> Result<(f64, f64, usize), CliError> {
        let (a, b) = (number(name, a)?, number(name, b)?);
        let n: usize = n.trim().parse().map_err(|_| CliError::Config(format!("{name}: bad point count {n:?}")))?;
        if n < 2 || !(a < b) {
            return Err(CliError::Config(format!("{name}: range needs start < stop and at least 2 points")));
        }
        Ok((a, b, n))
    };
    let values = match parts.as_slice() {
        [single] => single.split(',').map(|s| number(name, s)).collect::<Result<Vec<_>, _>>()?,
        [a, b, n] => {
            let (a, b, n) = range(a, b, n)?;
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        }
        ["log", a, b, n] => {
            let (a, b, n) = range(a, b, n)?;
            if a <= 0.0 {
                return Err(CliError::Config(format!("{name}: log grid needs a positive start")));
            }
            let (la, lb) = (a.log10(), b.log10());
            (0..n).map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64)).collect()
        }
        _ => return Err(CliError::Config(format!("{name}: unrecognized grid {spec:?}"))),
    };
    check_values(name, values)
}

fn parse_window(s: &str) -> Result<(f64, f64), CliError> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [a, b] => Ok((number("window", a)?, number("window", b)?)),
        _ => Err(CliError::Config(format!("window must be g1,g2, got {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("g", "0.1, 2,3").unwrap(), vec![0.1, 2.0, 3.0]);
        assert_eq!(parse_grid("g", "0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid("g", "log:1e-2:1e2:5").unwrap();
        assert!((g[2] - 1.0).abs() < 1e-15 && (g[4] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn bad_grids_are_config_errors() {
        for s in ["", "  ", "1:0:5", "0:1:1", "log:0:1:4", "a,b", "1:2", "nan"] {
            assert!(matches!(parse_grid("g", s), Err(CliError::Config(_))), "{s:?}");
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"gamma": [1, 2], "seed": 5, "format": "json", "tau_grid": "0:1:3"}"#).unwrap();
        let flags = Flags { gamma: Some("7".into()), config: Some(path), ..Default::default() };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.gamma, Some(vec![7.0]));
        assert_eq!(cfg.seed, Some(5));
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.tau_grid, Some(vec![0.0, 0.5, 1.0]));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"gama": [1]}"#).unwrap();
        let flags = Flags { config: Some(path), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&flags), Err(CliError::Config(_))));
    }
}
