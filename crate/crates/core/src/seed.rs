//! Seed derivation.
//!
//! A single master seed drives every random choice in the crate. Sub-seeds are
//! derived by mixing the parent seed with a stream key through SplitMix64, so
//! the stream a worker draws from depends only on `(seed, key)` and never on
//! scheduling. String keys (stage names such as `"2004-2006/inliers"`) are
//! first folded with FNV-1a.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of stream `index` under `seed`.
pub fn derive(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Derive a seed keyed by a stage name.
pub fn derive_str(seed: u64, key: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    derive(seed, h)
}

pub fn stream_rng(seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(seed, index))
}
