//! Reproducible random number generation.
//!
//! One generator (ChaCha12) is fixed for the whole crate so that identical
//! seeds reproduce identical samples bit for bit. Derived streams (segments,
//! replicates, table nodes) mix a master seed with a stream index through
//! SplitMix64 so that streams are decorrelated and independent of evaluation
//! order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SeededRng = ChaCha12Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer over `master` and `stream`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
