//! Seeded randomness.
//!
//! Every random draw in the harness comes from a ChaCha8 stream
//! (`rand_chacha::ChaCha8Rng`) keyed by a 64-bit seed. Sub-streams for folds
//! and ensemble members are derived from `(base_seed, index)` with
//! [`derive_seed`], which applies the SplitMix64 finalizer twice:
//!
//! ```text
//! derive_seed(base, index) = splitmix64(base ^ splitmix64(index + 0x9E3779B97F4A7C15))
//! ```
//!
//! Bounded integers are always drawn as `u64`, so results are identical on
//! 32- and 64-bit targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type HarnessRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream index (fold number, ensemble member, ...).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> HarnessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(base: u64, index: u64) -> HarnessRng {
    rng_from_seed(derive_seed(base, index))
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(items: &mut [T], rng: &mut HarnessRng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i as u64) as usize;
        items.swap(i, j);
    }
}

/// Uniform sample of `k` distinct elements of `pool`, returned in ascending order.
///
/// Panics if `k > pool.len()`; callers validate sizes first.
pub fn sample_sorted(pool: &[usize], k: usize, rng: &mut HarnessRng) -> Vec<usize> {
    assert!(k <= pool.len(), "sample size exceeds pool");
    let mut scratch = pool.to_vec();
    let n = scratch.len();
    // partial Fisher-Yates: the first k slots end up uniformly sampled
    for i in 0..k {
        let j = i + rng.random_range(0..(n - i) as u64) as usize;
        scratch.swap(i, j);
    }
    scratch.truncate(k);
    scratch.sort_unstable();
    scratch
}

/// Uniform real in `[0, 1)`.
pub fn unit(rng: &mut HarnessRng) -> f64 {
    rng.random::<f64>()
}

pub fn coin(rng: &mut HarnessRng) -> bool {
    rng.random::<u64>() >> 63 == 1
}
