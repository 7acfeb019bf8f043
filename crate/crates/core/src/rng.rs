//! Seed derivation for reproducible random streams.
//!
//! Every random draw in the crate comes from a [`StreamRng`] seeded from a
//! master seed plus a textual scope, so results do not depend on evaluation
//! order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Derives a child seed from `master` and a scope label.
pub fn derive_seed(master: u64, scope: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(scope.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scoped_stream(master: u64, scope: &str) -> StreamRng {
    stream(derive_seed(master, scope))
}
