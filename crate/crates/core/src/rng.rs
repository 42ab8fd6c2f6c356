//! Seeded random streams.
//!
//! Every replicate owns a [`ChaCha8Rng`] seeded from a 64-bit substream seed.
//! Substream seeds are derived from `(master_seed, replicate_index)` with the
//! SplitMix64 finalizer:
//!
//! ```text
//! z = master_seed + 0x9E3779B97F4A7C15 * (index + 1)     (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! so a replicate's stream depends only on its index, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the substream for replicate `index` under `master_seed`.
pub fn substream_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

pub fn rng_from_seed(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(master_seed: u64, index: u64) -> ChainRng {
    rng_from_seed(substream_seed(master_seed, index))
}
