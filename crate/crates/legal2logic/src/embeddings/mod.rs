//! Text embeddings behind a pluggable backend, with cosine similarity and a
//! persistent content-addressed cache.
//!
//! Two backends ship:
//!
//! * [`DeterministicLocalBackend`] — hashed character trigrams projected to a
//!   fixed dimension with signed hashing, L2-normalized. Fully deterministic
//!   and offline; every test and the default CLI path run on it.
//! * [`RemoteEmbeddingBackend`] — the common embeddings HTTP shape
//!   (`POST {model, input: [texts]}` returning `{data: [{embedding}]}`) with
//!   bearer-token auth.
//!
//! [`Embedder`] wraps a backend with an optional on-disk cache keyed by
//! (backend identity, content hash of text).

mod cache;
mod local;
mod remote;

pub use cache::EmbeddingCache;
pub use local::DeterministicLocalBackend;
pub use remote::RemoteEmbeddingBackend;

use std::path::Path;
use std::sync::Mutex;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("input text is empty after trimming")]
    EmptyInput,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("embedding backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("embedding cache: {0}")]
    Cache(#[from] std::io::Error),
}

/// A fixed-dimension real vector with its Euclidean norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        let norm = values.iter().map(|&v| v * v).sum::<f64>().sqrt();
        EmbeddingVector { values, norm }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Cosine similarity in [-1, 1], clamped against floating rounding.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbedError> {
    if a.dim() != b.dim() {
        return Err(EmbedError::DimensionMismatch(a.dim(), b.dim()));
    }
    if a.norm == 0.0 || b.norm == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    let dot: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| x * y)
        .sum();
    Ok((dot / (a.norm * b.norm)).clamp(-1.0, 1.0))
}

/// An embedding producer. Same input must yield the same vector for the
/// lifetime of one backend instance.
pub trait EmbeddingBackend: Send + Sync {
    /// Stable identity used for cache keying; must change when the produced
    /// vectors would change (model, dimension, algorithm revision).
    fn id(&self) -> String;

    /// Expected output dimension, when known up front.
    fn dimension(&self) -> Option<usize>;

    /// Embed one text. Inputs are already validated non-empty.
    fn embed_uncached(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;

    /// Embed a batch. Backends with a batched transport should override.
    fn embed_batch_uncached(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        texts.iter().map(|t| self.embed_uncached(t)).collect()
    }
}

/// Backend plus optional persistent cache. Cheap to share behind a reference;
/// the cache serializes its writes internally.
pub struct Embedder {
    backend: Box<dyn EmbeddingBackend>,
    cache: Option<Mutex<EmbeddingCache>>,
}

impl Embedder {
    pub fn new(backend: impl EmbeddingBackend + 'static) -> Self {
        Embedder {
            backend: Box::new(backend),
            cache: None,
        }
    }

    /// Attach an append-only cache file, creating or recovering it as needed.
    pub fn with_cache(
        backend: impl EmbeddingBackend + 'static,
        path: impl AsRef<Path>,
    ) -> Result<Self, EmbedError> {
        let cache = EmbeddingCache::open(path)?;
        Ok(Embedder {
            backend: Box::new(backend),
            cache: Some(Mutex::new(cache)),
        })
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    fn key(&self, text: &str) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.backend.id().as_bytes());
        hasher.update([0u8]);
        hasher.update(text.as_bytes());
        hasher.finalize().into()
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.trim().is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let key = self.key(text);
        if let Some(cache) = &self.cache {
            if let Some(values) = cache.lock().unwrap().get(&key) {
                return Ok(EmbeddingVector::new(values));
            }
        }
        let vector = self.backend.embed_uncached(text)?;
        if let Some(cache) = &self.cache {
            cache.lock().unwrap().put(&key, vector.values())?;
        }
        Ok(vector)
    }

    /// Embed many texts, batching cache misses through the backend.
    pub fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if let Some(t) = texts.iter().find(|t| t.trim().is_empty()) {
            let _ = t;
            return Err(EmbedError::EmptyInput);
        }
        let mut out: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
        let mut miss_idx = Vec::new();
        if let Some(cache) = &self.cache {
            let cache = cache.lock().unwrap();
            for (i, text) in texts.iter().enumerate() {
                match cache.get(&self.key(text)) {
                    Some(values) => out[i] = Some(EmbeddingVector::new(values)),
                    None => miss_idx.push(i),
                }
            }
        } else {
            miss_idx = (0..texts.len()).collect();
        }
        if !miss_idx.is_empty() {
            let miss_texts: Vec<&str> = miss_idx.iter().map(|&i| texts[i]).collect();
            let vectors = self.backend.embed_batch_uncached(&miss_texts)?;
            if vectors.len() != miss_texts.len() {
                return Err(EmbedError::BackendUnavailable(format!(
                    "backend returned {} vectors for {} inputs",
                    vectors.len(),
                    miss_texts.len()
                )));
            }
            for (&i, vector) in miss_idx.iter().zip(vectors) {
                if let Some(cache) = &self.cache {
                    cache.lock().unwrap().put(&self.key(texts[i]), vector.values())?;
                }
                out[i] = Some(vector);
            }
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }
}
