//! Seeded random number generation.
//!
//! Every random choice in the crate (rotation signs, k-means seeding, test
//! fixtures) goes through a SplitMix64 stream so that a given seed produces
//! the same numbers on every platform.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Standard normal samples.
pub fn normal_vec(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `+1.0` or `-1.0` from the top bit of the next output.
pub fn random_sign(rng: &mut SplitMix64) -> f64 {
    if rng.gen::<u64>() >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}
