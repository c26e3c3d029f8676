use thiserror::Error;

/// Errors raised across the simulators and the sweep tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ground state is degenerate: gap {gap:.3e} <= tolerance {tolerance:.1e}")]
    Degenerate { gap: f64, tolerance: f64 },

    #[error("reference evolution did not converge after {doublings} doublings (last change {change:.3e}, target {tolerance:.1e})")]
    Convergence {
        doublings: usize,
        change: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("propagator is not unitary (norm drift {0:.3e})")]
    NonUnitary(f64),

    #[error("Hilbert space too large: {sites} sites exceeds the cap of {cap}")]
    TooLarge { sites: usize, cap: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error("validation failed:\n{0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
