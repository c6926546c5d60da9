//! Seed derivation for reproducible random streams.
//!
//! Every randomized operation takes a single 64-bit master seed. Substreams
//! (reference draws, bootstrap resamples, Monte Carlo trials) are derived by
//! mixing the master seed with a stream tag through a SplitMix64-style
//! avalanche, so streams are decorrelated and independent of scheduling.
//! Determinism is guaranteed within a build; bit-equality of streams across
//! implementations is not part of the contract.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mix a master seed with a stream tag (SplitMix64 finalizer).
#[inline]
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed.wrapping_add(tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded generator for the substream identified by `tag`.
pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, tag))
}
