//! Seeded random streams.
//!
//! All randomness is drawn from ChaCha8, whose output is specified bit for bit
//! and does not depend on the platform. Independent runs get their own stream
//! of the same keyed generator, so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `(a, b)` of the generator keyed by `seed`.
pub fn substream(seed: u64, a: u32, b: u32) -> SeededRng {
    let mut rng = seeded(seed);
    rng.set_stream((u64::from(a) << 32) | u64::from(b));
    rng
}
