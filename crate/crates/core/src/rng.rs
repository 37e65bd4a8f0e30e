//! Counter-based random streams. Stream `i` of seed `s` depends only on
//! `(s, i)`, so work items can be sampled in any order or in parallel and
//! still reproduce the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha8 keyed by `seed`, positioned on stream `index`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer over `(seed, index)`, for handing independent
/// seeds to nested samplers.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
