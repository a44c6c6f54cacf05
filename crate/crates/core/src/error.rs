use thiserror::Error;

/// Errors raised by the laboratory's numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("reality violation: {0}")]
    Reality(String),

    #[error("degenerate patch: {0}")]
    Degenerate(String),

    #[error("geometry error at x-node {node}: denominator {value:e} off the diagonal")]
    Geometry { node: usize, value: f64 },

    #[error("blowup at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },

    #[error("insufficient modal signal: {0}")]
    InsufficientSignal(String),

    #[error("band error: {0}")]
    Band(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("generator error: {0}")]
    Generator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
