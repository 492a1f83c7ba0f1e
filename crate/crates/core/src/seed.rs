//! Counter-based seed derivation.
//!
//! Every path draws from its own ChaCha stream keyed by
//! `(master seed, stream, path index)`, so a batch produces the same numbers
//! regardless of how its paths are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path `index` in `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

pub fn rng_from_seed(seed: u64) -> PathRng {
    PathRng::seed_from_u64(seed)
}

pub fn path_rng(master: u64, stream: u64, index: u64) -> PathRng {
    rng_from_seed(derive_seed(master, stream, index))
}
