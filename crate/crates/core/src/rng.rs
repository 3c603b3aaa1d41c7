//! Seed-addressed random streams.
//!
//! Every random decision in an optimization run draws from a stream named by
//! `(seed, purpose, a, b)`. Streams are independent ChaCha8 instances, so the
//! values one operator sees do not depend on how many draws another consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. The discriminant becomes part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Initialization = 1,
    Offspring = 2,
    Padding = 3,
    Sampling = 4,
    Cycle = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns the stream for `(seed, purpose, a, b)`.
pub fn stream(seed: u64, purpose: Purpose, a: u64, b: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let words = [
        splitmix64(seed),
        splitmix64(seed ^ splitmix64(purpose as u64)),
        splitmix64(a.wrapping_mul(0xA24B_AED4_963E_E407) ^ seed),
        splitmix64(b.wrapping_mul(0x9FB2_1C65_1E98_DF25) ^ (purpose as u64)),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(a.rotate_left(32) ^ b);
    rng
}

/// Derives a child seed, e.g. one per interactive cycle.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ (purpose as u64).rotate_left(17)) ^ index)
}
