//! Seeded random streams.
//!
//! Every stochastic ingredient draws from its own ChaCha stream derived from
//! the run seed, the day index and a stream tag, so that changing how many
//! numbers one ingredient consumes never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Independent stream tags used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Signs = 1,
    PriceNoise = 2,
    PriceDraws = 3,
    Sizes = 4,
    Cancels = 5,
}

/// RNG for `(seed, day, stream)`.
pub fn day_stream(seed: u64, day: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(day.wrapping_mul(16).wrapping_add(stream as u64));
    rng
}

/// Plain seeded RNG for tests and one-off draws.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
