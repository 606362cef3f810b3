//! Seeded random streams.
//!
//! Every consumer of randomness in a training run gets its own ChaCha stream
//! derived from the run seed, so that enabling one component (say, an
//! adversary) never shifts the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Independent purposes that draw randomness during a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    MainInit = 1,
    AdversaryInit = 2,
    Shuffle = 3,
    Dropout = 4,
    DiscShuffle = 5,
    Data = 6,
    Split = 7,
    Mask = 8,
}

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: Stream) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
