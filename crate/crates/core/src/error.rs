use thiserror::Error;

use crate::model::Mode;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("no steady state: drift matrix has spectral abscissa {abscissa:.6e} rad/s")]
    NoSteadyState { abscissa: f64 },

    #[error("integration diverged at t = {time:.6e} s")]
    Divergence { time: f64 },

    #[error("mode {0} is not present in this covariance matrix")]
    UnknownMode(Mode),

    #[error("readout channel violates adiabaticity: kappa_c/g = {ratio:.3} < {required}")]
    Adiabaticity { ratio: f64, required: f64 },

    #[error("non-finite trajectory {index} (seed {seed})")]
    NonFiniteTrajectory { seed: u64, index: u64 },

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
