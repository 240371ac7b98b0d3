//! Error types shared by the simulation and extraction modules.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the physically supported domain of an operation.
    Domain(String),
    /// Invalid device / mesh / solver configuration.
    Config(String),
    /// Nonlinear solve failed to converge. Carries the residual history of
    /// the failing solve and the bias at which it happened so continuation
    /// drivers can react.
    Convergence {
        message: String,
        bias: f64,
        residual_history: Vec<f64>,
    },
    /// Curve analysis could not produce the requested figure of merit.
    Extraction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn extraction(msg: impl Into<String>) -> Self {
        Error::Extraction(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Convergence {
                message,
                bias,
                residual_history,
            } => write!(
                f,
                "convergence failure at bias {bias:.6} V: {message} (last residuals: {:?})",
                &residual_history[residual_history.len().saturating_sub(4)..]
            ),
            Error::Extraction(m) => write!(f, "extraction error: {m}"),
        }
    }
}

impl std::error::Error for Error {}
