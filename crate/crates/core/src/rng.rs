//! Seeding conventions.
//!
//! All randomness comes from ChaCha8 (`rand_chacha` 0.9). Independent streams
//! are derived from a root seed with SplitMix64 over a path of indices, e.g.
//! `root -> parameter index -> realization index`, so any node of the tree can
//! be regenerated without replaying its siblings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies the generator family in output metadata.
pub const RNG_NAME: &str = "chacha8/rand_chacha-0.9";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child `index` from `parent`.
pub fn child_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Follows a path of child indices from `root`.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(root, |s, &i| child_seed(s, i))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generator for one of several parallel streams sharing a seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
