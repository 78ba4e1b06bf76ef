//! Deterministic offline embedding backend.
//!
//! Texts are padded with one space on each side, decomposed into character
//! trigrams, and each trigram is FNV-1a-hashed to pick a bucket and a sign.
//! The signed bag of trigrams is then L2-normalized. The result is a unit
//! vector that is a pure function of the text, so selection and metric
//! properties can be exercised without any model.

use super::{EmbedError, EmbeddingBackend, EmbeddingVector};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hashed character-trigram embedding, default dimension 256.
#[derive(Debug, Clone)]
pub struct DeterministicLocalBackend {
    dimension: usize,
}

impl Default for DeterministicLocalBackend {
    fn default() -> Self {
        DeterministicLocalBackend { dimension: 256 }
    }
}

impl DeterministicLocalBackend {
    pub fn with_dimension(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        DeterministicLocalBackend { dimension }
    }
}

impl EmbeddingBackend for DeterministicLocalBackend {
    fn id(&self) -> String {
        format!("local-ngram3-d{}", self.dimension)
    }

    fn dimension(&self) -> Option<usize> {
        Some(self.dimension)
    }

    fn embed_uncached(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(text.trim().chars())
            .chain(std::iter::once(' '))
            .collect();
        let mut values = vec![0.0f64; self.dimension];
        let mut buf = [0u8; 12];
        for gram in padded.windows(3) {
            let mut len = 0;
            for &c in gram {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            let h = fnv1a(&buf[..len]);
            let bucket = (h % self.dimension as u64) as usize;
            let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
            values[bucket] += sign;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            // Signed buckets cancelled out entirely; fall back to a fixed
            // unit direction so the output stays usable.
            values[0] = 1.0;
        } else {
            for v in &mut values {
                *v /= norm;
            }
        }
        Ok(EmbeddingVector::new(values))
    }
}
