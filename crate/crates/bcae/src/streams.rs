//! Seeding conventions.
//!
//! All randomness flows from a single 64-bit seed. Independent purposes get
//! independent ChaCha streams over the same key, so adding a consumer never
//! perturbs the draws of another:
//!
//! - stream 0: parameter initialization
//! - stream 1: training message sampling
//! - stream 2: training channel noise
//! - streams `SER_CHUNK_BASE + i`: Monte-Carlo trial chunk `i`
//!
//! Sweep points derive per-run seeds with a splitmix64-based mix so that
//! `(base, point, repeat)` triples map to well-separated seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_INIT: u64 = 0;
pub const STREAM_TRAIN_MESSAGES: u64 = 1;
pub const STREAM_TRAIN_NOISE: u64 = 2;
/// Monte-Carlo chunk `i` uses stream `SER_CHUNK_BASE + i`.
pub const SER_CHUNK_BASE: u64 = 1 << 32;

/// ChaCha generator for one purpose-specific stream of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic seed for run `(a, b)` of an experiment keyed by `base`.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(a.wrapping_add(1))) ^ b.wrapping_add(1))
}
