//! Deterministic seed derivation for independent trials and per-op coins.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used everywhere in the crate.
pub type Rng = ChaCha8Rng;

/// Stream tags keep the seeds of different consumers within one trial apart.
pub mod stream {
    pub const WORKLOAD: u64 = 1;
    pub const ENGINE: u64 = 2;
    pub const COIN: u64 = 3;
    pub const PAYLOAD: u64 = 4;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `(base, index, stream)` into a fresh 64-bit seed.
pub fn derive_seed(base: u64, index: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ index) ^ stream.rotate_left(32))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
