//! Counter-based random streams.
//!
//! Every random draw is a pure function of `(seed, env index, step, tag)`, so
//! results never depend on scheduling, batch size, or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identity stored in each environment state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub env_index: u64,
}

/// Consumer tags. Per-unit consumers add the unit index.
pub mod tag {
    pub const HEURISTIC: u64 = 0x100;
    pub const RANDOM_POLICY: u64 = 0x200;
    pub const SAMPLE_LEVEL: u64 = 0x300;
    pub const MUTATE_LEVEL: u64 = 0x400;
    pub const ROLLOUT: u64 = 0x500;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes the key tuple into a 64-bit seed.
pub fn derive_seed(seed: u64, env_index: u64, step: u64, tag: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ env_index);
    h = splitmix64(h ^ step);
    splitmix64(h ^ tag)
}

impl RngStream {
    pub fn new(seed: u64, env_index: u64) -> Self {
        Self { seed, env_index }
    }

    /// Generator for one consumer at one step.
    pub fn at(&self, step: u64, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, self.env_index, step, tag))
    }
}
