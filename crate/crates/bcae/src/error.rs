//! Error taxonomy shared across the crate.
//!
//! Configuration and input problems are caller mistakes; training,
//! degenerate-encoder, and checkpoint failures are runtime conditions.
//! The CLI maps the former to exit code 2 and the latter to exit code 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent construction: wrong dimensions, bad hyperparameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Bad data handed to an otherwise valid object (labels out of range,
    /// stale tapes, malformed batches).
    #[error("input error: {0}")]
    Input(String),

    /// The channel would need negative noise variance at receiver 1.
    #[error(
        "degradedness violation: snr1 = {snr1_db} dB exceeds snr2 = {snr2_db} dB \
         (receiver 1 must be the noisier one; require snr1 <= snr2)"
    )]
    Degradedness { snr1_db: f64, snr2_db: f64 },

    /// The encoder batch has collapsed to (numerically) zero output, so the
    /// power normalizer has nothing to scale.
    #[error("degenerate encoder output: batch energy {sum_sq:.3e} is below 1e-30")]
    DegenerateEncoder { sum_sq: f64 },

    /// An optimizer update went bad at a known step.
    #[error("training failed at step {step}: {reason}")]
    Training { step: u64, reason: String },

    /// Anything wrong with a checkpoint file beyond plain I/O.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by how the caller configured or invoked the
    /// operation (CLI exit code 2), false for runtime failures (exit code 1).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Input(_) | Error::Degradedness { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
