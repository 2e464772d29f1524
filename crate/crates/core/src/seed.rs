//! Deterministic seed derivation. Every random choice in the workspace flows
//! from an explicit seed through these helpers; there is no ambient randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Seed = [u8; 32];

pub fn seed_from_u64(seed: u64) -> Seed {
    derive(&[0u8; 32], &["root", &seed.to_string()])
}

/// Child seed for a labelled path below `parent`.
pub fn derive(parent: &Seed, path: &[&str]) -> Seed {
    let mut h = Sha256::new();
    h.update(b"sfslab/seed");
    h.update(parent);
    for p in path {
        h.update((p.len() as u32).to_be_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().into()
}

pub fn derive_indexed(parent: &Seed, label: &str, index: u64) -> Seed {
    derive(parent, &[label, &index.to_string()])
}

pub fn rng(seed: &Seed) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(*seed)
}
