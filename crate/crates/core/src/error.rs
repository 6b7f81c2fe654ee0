use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    Convergence { sweeps: usize, residual: f64 },

    #[error("matrix is singular to working precision at pivot {pivot} (|pivot| = {magnitude:e})")]
    Singular { pivot: usize, magnitude: f64 },

    /// A gradient evaluation produced a non-finite value.
    #[error("non-finite gradient at iteration {iteration} (iterate {iterate:?})")]
    Numeric { iteration: usize, iterate: Vec<f64> },

    /// An eigenvector of a canonical problem fits none of the expected symmetry patterns.
    #[error("eigenvector {index} fits no symmetry pattern (antisymmetric residual {antisymmetric:e}, symmetric residual {symmetric:e})")]
    Structural {
        index: usize,
        antisymmetric: f64,
        symmetric: f64,
    },

    #[error("Hessian has an eigenvalue {eigenvalue:e} that is zero within tolerance; use degenerate_check")]
    DegenerateHessian { eigenvalue: f64 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
