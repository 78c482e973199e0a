//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha8 generator keyed by a
//! `(seed, stream)` pair so that independent consumers never share state and
//! results are identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Named stream identifiers.
pub mod stream {
    pub const TRACE: u64 = 1;
    pub const LINK_NOISE: u64 = 2;
    pub const PROBE_NOISE: u64 = 3;
    pub const INIT: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const EXPLORE: u64 = 6;
    pub const SUBSAMPLE: u64 = 7;
    pub const EPISODE: u64 = 8;
}

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed; used to give each episode of a run its own seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser over the combined words
    let mut z = seed ^ index.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
