use thiserror::Error;

/// Errors raised by the probe toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e} after {intervals} intervals")]
    Quadrature {
        value: f64,
        achieved: f64,
        requested: f64,
        intervals: usize,
    },

    /// A series stopped at its term cap before the terms fell below tolerance.
    #[error("series did not converge after {terms} terms: partial sum {partial_sum}, last term {last_term:e}")]
    Series {
        partial_sum: f64,
        last_term: f64,
        terms: usize,
    },

    /// Iterative special-function evaluation failed to converge.
    #[error("special function {name} did not converge at a = {a}, x = {x}")]
    SpecialFunction { name: &'static str, a: f64, x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
