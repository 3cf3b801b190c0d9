//! Seeded random streams.
//!
//! Every stochastic step (frequency allocation, solver initialization, test
//! draws) takes an explicit `u64` seed. [`derive_seed`] expands a master seed
//! into independent sub-seeds so that adding trials never perturbs earlier
//! ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type SpwtRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SpwtRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministically mixes `stream` into `master` (SplitMix64 finalizer over
/// a golden-ratio stride).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Well-known stream ids for [`derive_seed`].
pub mod stream {
    pub const FREQUENCIES: u64 = 1;
    pub const INIT: u64 = 2;
}
