//! Seeded, splittable randomness.
//!
//! Every sampled computation derives its generators from a single `u64`
//! seed. Work is cut into fixed-size shards and shard `k` draws from ChaCha
//! stream `k`, so results do not depend on how many threads run the shards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::ops::Range;

pub type SampleRng = ChaCha8Rng;

/// Number of samples drawn from one stream.
pub const SHARD_SIZE: usize = 64;

/// Generator for stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent child seed for sub-task `tag` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal_vector(rng: &mut SampleRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}

/// Runs `work` over `count` samples cut into shards, returning per-shard
/// results in shard order.
pub fn map_shards<T, F>(seed: u64, count: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>, &mut SampleRng) -> T + Sync,
{
    let shards = count.div_ceil(SHARD_SIZE);
    let run = |k: usize| {
        let start = k * SHARD_SIZE;
        let end = (start + SHARD_SIZE).min(count);
        let mut rng = stream(seed, k as u64);
        work(start..end, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..shards).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..shards).map(run).collect()
    }
}
