//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a single
//! user seed. Independent sub-streams (trials, restarts, generator blocks) use
//! `derive_seed(base, index)`, which is SplitMix64 applied to
//! `base ^ splitmix64(index + 1)`. Nested derivations chain the call.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(1)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
