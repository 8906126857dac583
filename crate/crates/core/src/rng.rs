//! Seed derivation. Every random choice in the crate flows from a `u64` seed
//! through these two functions, so serial and parallel runs agree exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Independent RNG for trial `index` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sub-seed for a named component: first 8 bytes of `SHA-256(seed_be ∥ label)`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let digest = Sha256::new().chain_update(seed.to_be_bytes()).chain_update(label.as_bytes()).finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
