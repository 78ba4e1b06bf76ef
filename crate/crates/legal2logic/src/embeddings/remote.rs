//! Remote embedding backend over the common embeddings HTTP shape.
//!
//! `POST {base}/embeddings` with `{"model": ..., "input": [texts]}`, bearer
//! auth, response `{"data": [{"embedding": [...]}, ...]}`. Transport failures
//! and 5xx responses are retried 3 times with exponential backoff starting at
//! 500 ms; 4xx responses surface immediately.

use std::time::Duration;

use serde::Deserialize;

use super::{EmbedError, EmbeddingBackend, EmbeddingVector};

const MAX_ATTEMPTS: u32 = 3;
const BACKOFF_BASE_MS: u64 = 500;

#[derive(Debug, Clone)]
pub struct RemoteEmbeddingBackend {
    base_url: String,
    api_key: Option<String>,
    model: String,
    dimension_hint: Option<usize>,
    timeout: Duration,
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f64>,
}

impl RemoteEmbeddingBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, model: impl Into<String>) -> Self {
        RemoteEmbeddingBackend {
            base_url: base_url.into(),
            api_key,
            model: model.into(),
            dimension_hint: None,
            timeout: Duration::from_secs(60),
        }
    }

    /// Read `EMBED_API_BASE`, `EMBED_API_KEY`, `EMBED_MODEL`.
    pub fn from_env() -> Result<Self, EmbedError> {
        let base = std::env::var("EMBED_API_BASE").map_err(|_| {
            EmbedError::BackendUnavailable("EMBED_API_BASE is not set".into())
        })?;
        let key = std::env::var("EMBED_API_KEY").ok();
        let model = std::env::var("EMBED_MODEL").unwrap_or_default();
        Ok(Self::new(base, key, model))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_dimension_hint(mut self, dimension: usize) -> Self {
        self.dimension_hint = Some(dimension);
        self
    }

    fn endpoint(&self) -> String {
        format!("{}/embeddings", self.base_url.trim_end_matches('/'))
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| EmbedError::BackendUnavailable(e.to_string()))?;
        let body = serde_json::json!({ "model": self.model, "input": texts });

        let mut last_err = String::new();
        for attempt in 0..MAX_ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
            }
            let mut req = client.post(self.endpoint()).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Err(e) => last_err = format!("transport: {e}"),
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_server_error() {
                        last_err = format!("server error: {status}");
                    } else if !status.is_success() {
                        // 4xx never retries.
                        return Err(EmbedError::BackendUnavailable(format!(
                            "request rejected: {status}"
                        )));
                    } else {
                        let parsed: EmbeddingsResponse = resp
                            .json()
                            .map_err(|e| EmbedError::BackendUnavailable(format!("bad response: {e}")))?;
                        if parsed.data.len() != texts.len() {
                            return Err(EmbedError::BackendUnavailable(format!(
                                "{} embeddings for {} inputs",
                                parsed.data.len(),
                                texts.len()
                            )));
                        }
                        return Ok(parsed
                            .data
                            .into_iter()
                            .map(|item| EmbeddingVector::new(item.embedding))
                            .collect());
                    }
                }
            }
        }
        Err(EmbedError::BackendUnavailable(format!(
            "{last_err} (after {MAX_ATTEMPTS} attempts)"
        )))
    }
}

impl EmbeddingBackend for RemoteEmbeddingBackend {
    fn id(&self) -> String {
        format!("remote-{}-{}", self.base_url, self.model)
    }

    fn dimension(&self) -> Option<usize> {
        self.dimension_hint
    }

    fn embed_uncached(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        Ok(self.request(&[text])?.remove(0))
    }

    fn embed_batch_uncached(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        self.request(texts)
    }
}
