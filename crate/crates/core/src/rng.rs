//! Deterministic random streams.
//!
//! Every path is drawn from a `ChaCha8Rng` seeded with a 64-bit value.
//! ChaCha output is value-stable across platforms and `rand_chacha`
//! releases, so `(spec, seed, n)` pins a path bit-for-bit. Replication
//! seeds are derived from a master seed with the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

/// Name of the generator algorithm, recorded in report metadata.
pub const RNG_ALGORITHM: &str = "chacha8/splitmix64";

pub fn path_rng(seed: u64) -> PathRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}
