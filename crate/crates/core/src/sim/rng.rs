//! Per-replicate random streams.
//!
//! The generator is ChaCha with 12 rounds (`rand_chacha::ChaCha12Rng`).
//! The 256-bit key is expanded from the 64-bit run seed by
//! `SeedableRng::seed_from_u64`, and replicate `i` reads ChaCha stream `i`
//! from word position zero. ChaCha is counter-based, so a replicate's
//! draws depend only on `(seed, i)` and never on which worker runs it or
//! in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

pub fn replicate_stream(seed: u64, replicate: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}
