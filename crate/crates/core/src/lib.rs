//! Qubit probes of classical noise.
//!
//! A qubit coupled to a classical fluctuating field through σ_x dephases at a
//! rate set by the noise. This crate computes that dephasing for random
//! telegraph noise and for 1/f^α ensembles of telegraph fluctuators, the
//! Fisher and quantum Fisher information it carries about the noise
//! parameters, the interaction times that maximize it, and a Monte Carlo
//! trajectory oracle against which the closed forms are checked.
//!
//! ```
//! use qprobe::{noise::RtnParams, estimation::qfi_rtn};
//!
//! let report = qfi_rtn(std::f64::consts::FRAC_PI_2, &RtnParams::new(0.5).unwrap()).unwrap();
//! assert!(report.qfi > 0.0);
//! assert!((report.qsnr - 0.25 * report.qfi).abs() < 1e-15);
//! ```

pub mod dephasing;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod noise;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod validate;

pub use error::{Error, Result};
