//! Deterministic random streams derived from one 64-bit master seed.
//!
//! Every stream is a ChaCha8 generator keyed by `seed_from_u64(master)` with the
//! ChaCha stream id set to the ordinal of the trial (or group) it drives. Work
//! can therefore run on any number of threads and still reproduce bit for bit.
//! Independent purposes (message bits, group trials) use separate domains, which
//! re-key the master seed through SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for work item `ordinal`.
    pub fn stream(&self, ordinal: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ordinal);
        rng
    }

    /// A disjoint family of streams for another purpose.
    pub fn domain(&self, domain: u64) -> SeedStreams {
        SeedStreams::new(splitmix64(self.seed ^ splitmix64(domain.wrapping_add(1))))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
