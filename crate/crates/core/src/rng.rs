//! Seeded random streams.
//!
//! Every random draw in the crate comes from a `Xoshiro256PlusPlus`
//! generator seeded through SplitMix64. Independent work items (a converted
//! instance, a simulation trial) each get their own stream derived from the
//! run seed and the item index, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `seed`.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Generator for the root of a run.
pub fn root(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Generator for work item `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix(seed, index))
}
