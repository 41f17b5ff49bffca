//! Seeded random streams.
//!
//! Every run owns independent ChaCha streams derived from a 64-bit seed plus a
//! stream id, so the capacity schedule never shares state with the optimiser.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Logical purpose of a random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Instance,
    Schedule,
    /// Optimiser stream; the index separates sub-runs sharing one seed.
    Algorithm(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Instance => 1,
            Stream::Schedule => 2,
            Stream::Algorithm(k) => 0x100 + u64::from(k),
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
