//! Deterministic, splittable random streams.
//!
//! A stream is identified by `(master_seed, module_tag, stream_index)`. The
//! 32-byte ChaCha20 key is the SHA-256 digest of
//!
//! ```text
//! "fivegsim-stream-v1" || master_seed (u64 LE) || len(tag) (u64 LE) || tag || stream_index (u64 LE)
//! ```
//!
//! so distinct tags or indices select unrelated keys. Draw algorithms, fixed so
//! other implementations can match distributions:
//!
//! - uniform `f64` in `[0, 1)`: `rand`'s `StandardUniform`, i.e. the top 53 bits
//!   of a `u64` scaled by 2^-53;
//! - standard Gaussian: `rand_distr::StandardNormal` (ziggurat);
//! - bounded integers: `rand`'s `random_range` (Lemire's widening multiply);
//! - shuffles: `rand`'s Fisher–Yates `SliceRandom::shuffle`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// The random stream type used throughout the crate.
pub type Stream = ChaCha20Rng;

const DOMAIN: &[u8] = b"fivegsim-stream-v1";

/// Derive an independent random stream for `(master_seed, module_tag, stream_index)`.
pub fn seeded_stream(master_seed: u64, module_tag: &str, stream_index: u64) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update(master_seed.to_le_bytes());
    hasher.update((module_tag.len() as u64).to_le_bytes());
    hasher.update(module_tag.as_bytes());
    hasher.update(stream_index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}

/// Derive a child seed, for APIs that take a plain `u64` seed.
pub fn derive_seed(master_seed: u64, module_tag: &str, stream_index: u64) -> u64 {
    use rand::RngCore;
    seeded_stream(master_seed, module_tag, stream_index).next_u64()
}
