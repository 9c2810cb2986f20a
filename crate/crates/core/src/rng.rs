//! Deterministic random streams.
//!
//! Every stochastic routine takes a `(seed, stream)` pair. Stream `r` of seed
//! `s` is ChaCha8 keyed by `s` with its 64-bit stream counter set to `r`, so
//! replicas are independent and reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Identity recorded in trace and report headers.
pub const GENERATOR_ID: &str = "rand_chacha-0.9/ChaCha8Rng(seed_from_u64, set_stream)";

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
