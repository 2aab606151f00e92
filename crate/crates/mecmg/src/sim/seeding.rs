//! Deterministic stream derivation.
//!
//! Every random stream in an experiment is keyed by
//! `(seed, tag, run_index, stream_index)` through SHA-256, so adding runs,
//! players, or whole policies never perturbs the draws of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

pub fn derive_rng(seed: u64, tag: &str, run: u64, stream: u64) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(b"mecmg.stream.v1");
    h.update(seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(run.to_le_bytes());
    h.update(stream.to_le_bytes());
    ChaCha12Rng::from_seed(h.finalize().into())
}
