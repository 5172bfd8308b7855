//! Seed derivation and deterministic random number generation.
//!
//! Every randomized step in the crate draws from a ChaCha8 stream seeded
//! through [`derive_seed`], so a single run seed reproduces shuffles, client
//! sampling, weight initialization, and traffic generation bit-for-bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates nearby integer inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and two indices.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    mix(base ^ mix(a ^ mix(b)))
}

/// Deterministic generator for the given seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
