//! Remote chat-completions backend.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::{GenerationConfig, LlmBackend, LlmError};

const MAX_ATTEMPTS: u32 = 3;
const BACKOFF_BASE_MS: u64 = 500;

/// Client-side token bucket. Default 2 requests per second.
#[derive(Debug)]
pub struct RateLimiter {
    state: Mutex<BucketState>,
    rate_per_sec: f64,
    burst: f64,
}

#[derive(Debug)]
struct BucketState {
    tokens: f64,
    last: Instant,
}

impl RateLimiter {
    pub fn new(rate_per_sec: f64) -> Self {
        assert!(rate_per_sec > 0.0);
        RateLimiter {
            state: Mutex::new(BucketState {
                tokens: 1.0,
                last: Instant::now(),
            }),
            rate_per_sec,
            burst: rate_per_sec.max(1.0),
        }
    }

    /// Block until a request token is available.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut s = self.state.lock().unwrap();
                let now = Instant::now();
                s.tokens = (s.tokens + now.duration_since(s.last).as_secs_f64() * self.rate_per_sec)
                    .min(self.burst);
                s.last = now;
                if s.tokens >= 1.0 {
                    s.tokens -= 1.0;
                    None
                } else {
                    Some(Duration::from_secs_f64((1.0 - s.tokens) / self.rate_per_sec))
                }
            };
            match wait {
                None => return,
                Some(d) => std::thread::sleep(d),
            }
        }
    }
}

impl Default for RateLimiter {
    fn default() -> Self {
        RateLimiter::new(2.0)
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

/// Chat-completions client with retry and rate limiting.
pub struct RemoteLlmBackend {
    base_url: String,
    api_key: Option<String>,
    limiter: RateLimiter,
    /// Split the first prompt line into a system message instead of sending
    /// the whole prompt as one user message.
    use_system_role: bool,
}

impl RemoteLlmBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        RemoteLlmBackend {
            base_url: base_url.into(),
            api_key,
            limiter: RateLimiter::default(),
            use_system_role: false,
        }
    }

    /// Read `LLM_API_BASE`, `LLM_API_KEY` (`LLM_MODEL` is consumed by the
    /// caller through [`GenerationConfig::model`]).
    pub fn from_env() -> Result<Self, LlmError> {
        let base = std::env::var("LLM_API_BASE")
            .map_err(|_| LlmError::BackendUnavailable("LLM_API_BASE is not set".into()))?;
        let key = std::env::var("LLM_API_KEY").ok();
        Ok(Self::new(base, key))
    }

    pub fn with_rate_limit(mut self, requests_per_sec: f64) -> Self {
        self.limiter = RateLimiter::new(requests_per_sec);
        self
    }

    pub fn with_system_role(mut self, use_system_role: bool) -> Self {
        self.use_system_role = use_system_role;
        self
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }

    fn messages(&self, prompt: &str) -> serde_json::Value {
        if self.use_system_role {
            if let Some((first, rest)) = prompt.split_once('\n') {
                return serde_json::json!([
                    { "role": "system", "content": first },
                    { "role": "user", "content": rest.trim_start_matches('\n') },
                ]);
            }
        }
        serde_json::json!([{ "role": "user", "content": prompt }])
    }
}

impl LlmBackend for RemoteLlmBackend {
    fn kind_name(&self) -> &'static str {
        "remote"
    }

    fn generate(&self, prompt: &str, cfg: &GenerationConfig) -> Result<String, LlmError> {
        if prompt.is_empty() {
            return Err(LlmError::EmptyPrompt);
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| LlmError::BackendUnavailable(e.to_string()))?;
        let mut body = serde_json::json!({
            "model": cfg.model,
            "messages": self.messages(prompt),
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        });
        if let Some(seed) = cfg.seed {
            body["seed"] = serde_json::json!(seed);
        }

        let mut last_err = String::new();
        for attempt in 0..MAX_ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
            }
            self.limiter.acquire();
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
                        // 4xx surfaces immediately, no retry.
                        return Err(LlmError::BackendUnavailable(format!(
                            "request rejected: {status}"
                        )));
                    } else {
                        let parsed: ChatResponse = resp.json().map_err(|e| {
                            LlmError::BackendUnavailable(format!("bad response: {e}"))
                        })?;
                        return parsed
                            .choices
                            .into_iter()
                            .next()
                            .map(|c| c.message.content)
                            .ok_or_else(|| {
                                LlmError::BackendUnavailable("response has no choices".into())
                            });
                    }
                }
            }
        }
        Err(LlmError::BackendUnavailable(format!(
            "{last_err} (after {MAX_ATTEMPTS} attempts)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limiter_enforces_rate() {
        let limiter = RateLimiter::new(50.0);
        let start = Instant::now();
        for _ in 0..6 {
            limiter.acquire();
        }
        // Bucket starts with 1 token; the next 5 must wait ~20ms each... at
        // least most of that, allowing generous scheduler slack.
        assert!(start.elapsed() >= Duration::from_millis(60));
    }

    #[test]
    fn system_role_split() {
        let backend = RemoteLlmBackend::new("http://x", None).with_system_role(true);
        let msgs = backend.messages("### header line\n\n### Input: body");
        assert_eq!(msgs[0]["role"], "system");
        assert_eq!(msgs[0]["content"], "### header line");
        assert_eq!(msgs[1]["content"], "### Input: body");
    }
}
