//! Seeding.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded through
//! [`rng_from_seed`]. Child seeds for independent streams (cells, trials, the
//! signal and noise draws of one trial) are derived with [`split_seed`], which
//! applies the SplitMix64 finalizer to `parent + (stream + 1) * golden_gamma`.
//! Any reimplementation using the same two functions reproduces the same seed
//! tree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `stream` from `parent`.
pub fn split_seed(parent: u64, stream: u64) -> u64 {
    mix64(parent.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
