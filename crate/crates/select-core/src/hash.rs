//! Stable SHA-256 derived values.
//!
//! Everything that looks random but must be reproducible across runs,
//! platforms, and thread counts (synthetic embeddings, prompt scalars,
//! concept directions) is derived from SHA-256 digests instead of a
//! global RNG.

use alloc::string::String;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

/// Hex digest of `parts` joined with a NUL separator.
pub fn stable_hex(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0u8]);
        }
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push(char::from_digit((byte >> 4) as u32, 16).unwrap());
        out.push(char::from_digit((byte & 0xf) as u32, 16).unwrap());
    }
    out
}

/// Stream of f64 values in [-1, 1), seeded by a label and a u64 seed.
fn unit_stream(label: &str, seed: u64, len: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(len);
    let mut counter: u64 = 0;
    while values.len() < len {
        let mut hasher = Sha256::new();
        hasher.update(label.as_bytes());
        hasher.update(seed.to_le_bytes());
        hasher.update(counter.to_le_bytes());
        let digest = hasher.finalize();
        for chunk in digest.chunks_exact(8) {
            if values.len() == len {
                break;
            }
            let bits = u64::from_le_bytes(chunk.try_into().unwrap());
            // 53 mantissa bits -> uniform in [0, 1), then shift to [-1, 1).
            let unit = (bits >> 11) as f64 / (1u64 << 53) as f64;
            values.push(unit * 2.0 - 1.0);
        }
        counter += 1;
    }
    values
}

/// Deterministic unit-norm vector for a label. Same label and seed give
/// byte-identical output.
pub fn unit_vector(label: &str, seed: u64, dim: usize) -> Vec<f64> {
    assert!(dim > 0, "unit_vector needs dim > 0");
    let mut v = unit_stream(label, seed, dim);
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    } else {
        // Astronomically unlikely; fall back to a basis vector.
        v[0] = 1.0;
    }
    v
}

/// Deterministic scalar in [lo, hi] for a label.
pub fn scalar_in(label: &str, seed: u64, lo: f64, hi: f64) -> f64 {
    let unit = (unit_stream(label, seed, 1)[0] + 1.0) / 2.0;
    lo + unit * (hi - lo)
}
