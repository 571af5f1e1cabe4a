use thiserror::Error;

/// Errors produced by the analysis, calibration and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid code definition: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("SNR grid is not uniform in linear scale (max deviation {0:e})")]
    NonUniformGrid(f64),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("relay count {0} exceeds the subset-enumeration limit of {max}", max = crate::analysis::MAX_ENUMERATED_RELAYS)]
    TooManyRelays(usize),

    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
