//! Counter-based seed derivation.
//!
//! Every random stream in the crate descends from one 64-bit master seed.
//! A child stream is identified by a path of counters (trial, round, ...)
//! and its seed is a pure function of the master seed and that path, so
//! results never depend on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// Child seed for counter `tag`.
    pub fn split(self, tag: u64) -> Seed {
        Seed(splitmix64(splitmix64(self.0) ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03)))
    }

    pub fn rng(self) -> Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
