use thiserror::Error;

/// Errors raised by the simulation and analysis stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid driver: {0}")]
    Driver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("harmonic {0} is forbidden by the bicircular selection rule (q ≡ 0 mod 3)")]
    ForbiddenHarmonic(i64),

    #[error("rotation angle {alpha} rad is not a multiple of the azimuthal step {step} rad")]
    Incommensurate { alpha: f64, step: f64 },

    #[error("harmonic {q} is outside the retained range {lo}..={hi}")]
    HarmonicOutOfRange { q: i64, lo: i64, hi: i64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("window width {sigma} is resolved by only {samples:.2} samples (need at least 8)")]
    UnderResolved { sigma: f64, samples: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed output: {0}")]
    Output(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
