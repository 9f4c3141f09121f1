use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Newton iteration exhausted its budget.
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// An iterate left the region w^2 < c where the profile equation is smooth.
    #[error("iterate left the smooth region: max w^2 - c = {excess:.3e}")]
    DomainExit { excess: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigensolver failed on a {size}x{size} matrix (max |entry| {max_entry:.3e})")]
    Eigen { size: usize, max_entry: f64 },

    /// Cubic coefficients came out with an imaginary part that the
    /// spectral symmetries forbid.
    #[error("cubic coefficient q{index} has imaginary residue {residue:.3e} (scale {scale:.3e})")]
    Consistency { index: usize, residue: f64, scale: f64 },

    #[error("degenerate cubic: leading coefficient vanishes")]
    DegenerateCubic,

    #[error("no sign change of the discriminant on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
