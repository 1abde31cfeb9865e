//! Two-user autoencoder for the degraded AWGN broadcast channel.
//!
//! One transmitter sends independent messages to two receivers; receiver 1
//! observes a strictly noisier version of receiver 2's signal. An encoder
//! network maps the joint one-hot message to a single power-normalized real
//! symbol, and per-user decoder networks recover the messages from their
//! noisy observations. Training the whole chain end to end reproduces
//! classical superposition coding: a coarse/fine constellation, Gray-coded
//! labels, and an SNR-dependent power split between the users.
//!
//! The crate is organized around that pipeline:
//!
//! - [`nn`] / [`adam`]: a minimal dense-network engine with exact
//!   reverse-mode gradients and the Adam optimizer
//! - [`channel`]: SNR arithmetic, power normalization, and the two-layer
//!   noise model
//! - [`autoencoder`]: system assembly, the joint training loop, and
//!   checkpointable models
//! - [`analysis`]: constellation extraction, power decomposition, labeling
//!   verdicts, Monte-Carlo symbol error rates, the classical superposition
//!   baseline with an analytic oracle, and the power-inversion sweep
//! - [`checkpoint`]: versioned text serialization
//!
//! All randomness is derived from explicit 64-bit seeds (see [`streams`]),
//! so every result in the crate is reproducible bit for bit.

pub mod adam;
pub mod analysis;
pub mod autoencoder;
pub mod batch;
pub mod channel;
pub mod checkpoint;
pub mod error;
pub mod nn;
pub mod repro;
pub mod streams;

pub use batch::Batch;
pub use error::{Error, Result};
