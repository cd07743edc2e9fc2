//! Seed derivation and the deterministic generator used for every random draw.
//!
//! Sub-seeds are derived by hashing labelled parts, so a draw depends only on
//! its own key and never on scheduling or on how many other draws happened.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Name recorded alongside persisted artifacts.
pub const GENERATOR: &str = "chacha8-sha256seed-v1";

pub type Rng = ChaCha8Rng;

/// Hashes length-prefixed parts into a 64-bit seed.
pub fn derive_seed(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
