use std::io;

use thiserror::Error;

/// Errors produced by the simulation and experiment machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at sample {index}: {context}")]
    NonFinite { index: usize, context: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time window [-2T, 2T] with T = {half_width} does not fit in sampled interval [{start}, {end}]")]
    WindowOutOfRange { half_width: f64, start: f64, end: f64 },

    #[error(
        "Picard iteration is not contracting (increment {residual:.3e}, growing for {streak} consecutive iterations); \
         the Duhamel map only contracts for short times, retry with a smaller final time T"
    )]
    PicardDiverged { streak: usize, residual: f64 },

    #[error("evolution became non-finite at t = {time}; the local theory only covers short times, retry with a smaller T")]
    Unstable { time: f64 },

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
