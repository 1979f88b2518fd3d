//! Counter-based seed derivation.
//!
//! Every trial derives its generator state from `(run seed, trial index,
//! stream)` alone, so trials can be evaluated in any order or on any number
//! of workers and still see the same random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep independent random quantities of one trial apart.
pub mod stream {
    pub const THRESHOLDS: u64 = 0x7468_7265_7368;
    pub const INSTANCE: u64 = 0x696e_7374;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes two words into one well-distributed seed.
#[inline]
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.rotate_left(17) ^ 0x5851_f42d_4c95_7f2d)
}

/// Seed of trial `trial_index` in a run seeded with `run_seed`.
#[inline]
pub fn trial_seed(run_seed: u64, trial_index: u64) -> u64 {
    mix(run_seed, trial_index)
}

/// Generator for one `(seed, stream)` pair.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream))
}
