//! Hash-derived pseudo-embeddings for offline runs.
//!
//! Each content word adds ±1 at a coordinate picked by its SHA-256 digest,
//! and the vector is L2-normalized. Texts sharing vocabulary land near each
//! other, which keeps offline topographies meaningful. Fully deterministic.

use alloc::vec;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::text::content_words;

pub const ECHO_MODEL: &str = "echo";
pub const DEFAULT_ECHO_DIM: usize = 64;

pub fn echo_embedding(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim.max(1)];
    for word in content_words(text) {
        let digest = Sha256::digest(word.as_bytes());
        let mut idx = [0u8; 8];
        idx.copy_from_slice(&digest[..8]);
        let slot = (u64::from_le_bytes(idx) % v.len() as u64) as usize;
        v[slot] += if digest[8] & 1 == 0 { 1.0 } else { -1.0 };
    }
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}
