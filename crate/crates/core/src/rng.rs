//! Seedable, splittable random streams.
//!
//! Every stochastic routine takes either an explicit `&mut impl Rng` or a
//! root seed. Parallel work derives one ChaCha stream per task index so the
//! output does not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream number `index` of the generator keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Child seed for a labelled sub-task (e.g. one grid point of a sweep).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(0x6a09_e667_f3bc_c909)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
