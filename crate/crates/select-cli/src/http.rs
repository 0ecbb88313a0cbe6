//! HTTP scoring backend.
//!
//! Wire protocol: `POST {base_url}/v1/score` with a JSON body
//! `{"mode":"fill"|"ppl"|"complete","model":...,"text":...,"word":...}`
//! and an `Authorization: Bearer {api_key}` header. Responses are
//! `{"ok":true,"value":n}`, `{"ok":true,"text":s}`, or
//! `{"ok":false,"error":s}`.
//!
//! Every unique (backend id, request payload) pair is answered from the
//! write-once cache after its first network round trip; retries use
//! exponential backoff and only re-send on transport failures and 5xx.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use select_core::{BackendError, MaskedPrompt, PerplexityValue, Probability, ScoringBackend};

use crate::cache::{CacheError, ResponseCache};

/// Connection settings for the remote scorer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteBackendConfig {
    pub base_url: String,
    #[serde(skip_serializing)]
    pub api_key: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub model_id: String,
}

impl RemoteBackendConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.timeout_ms == 0 {
            return Err(BackendError::Unavailable("timeout must be > 0".into()));
        }
        if self.base_url.trim().is_empty() {
            return Err(BackendError::Unavailable("base_url is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Transport seam: the real implementation speaks HTTP, tests substitute
/// counting or scripted fakes.
pub trait Transport: Send + Sync {
    fn post(
        &self,
        url: &str,
        api_key: &str,
        body: &str,
        timeout: Duration,
    ) -> Result<HttpResponse, String>;
}

/// Blocking HTTP transport.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new() -> UreqTransport {
        UreqTransport {
            agent: ureq::AgentBuilder::new().build(),
        }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        UreqTransport::new()
    }
}

impl Transport for UreqTransport {
    fn post(
        &self,
        url: &str,
        api_key: &str,
        body: &str,
        timeout: Duration,
    ) -> Result<HttpResponse, String> {
        let request = self
            .agent
            .post(url)
            .timeout(timeout)
            .set("Authorization", &format!("Bearer {api_key}"))
            .set("Content-Type", "application/json");
        match request.send_string(body) {
            Ok(response) => {
                let status = response.status();
                let body = response.into_string().map_err(|e| e.to_string())?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Status(status, response)) => {
                let body = response.into_string().unwrap_or_default();
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Transport(t)) => Err(t.to_string()),
        }
    }
}

/// Per-run backend counters, embedded in run records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendStats {
    pub cache_hits: u64,
    pub network_calls: u64,
    pub retries: u64,
}

/// Remote scoring backend with retry, backoff, and response caching.
pub struct HttpScoringBackend<T: Transport> {
    config: RemoteBackendConfig,
    transport: T,
    cache: ResponseCache,
    stats: Mutex<BackendStats>,
    sleep: Box<dyn Fn(Duration) + Send + Sync>,
}

const BACKOFF_BASE_MS: u64 = 50;

fn excerpt(body: &str) -> String {
    const LIMIT: usize = 200;
    if body.len() <= LIMIT {
        body.to_owned()
    } else {
        let mut cut = LIMIT;
        while !body.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}…", &body[..cut])
    }
}

impl<T: Transport> HttpScoringBackend<T> {
    pub fn new(
        config: RemoteBackendConfig,
        transport: T,
        cache: ResponseCache,
    ) -> Result<HttpScoringBackend<T>, BackendError> {
        config.validate()?;
        Ok(HttpScoringBackend {
            config,
            transport,
            cache,
            stats: Mutex::new(BackendStats::default()),
            sleep: Box::new(std::thread::sleep),
        })
    }

    /// Replace the backoff sleeper (tests use a no-op).
    pub fn with_sleeper(
        mut self,
        sleep: Box<dyn Fn(Duration) + Send + Sync>,
    ) -> HttpScoringBackend<T> {
        self.sleep = sleep;
        self
    }

    pub fn stats(&self) -> BackendStats {
        *self.stats.lock().expect("stats lock")
    }

    fn endpoint(&self) -> String {
        format!("{}/v1/score", self.config.base_url.trim_end_matches('/'))
    }

    fn cache_error(e: CacheError) -> BackendError {
        match e {
            CacheError::Conflict { key } => BackendError::CacheConflict { key },
            CacheError::Corrupt { path, .. } => BackendError::CacheCorrupt {
                path: path.display().to_string(),
            },
            CacheError::Io { path, source } => {
                BackendError::Unavailable(format!("cache io at {}: {source}", path.display()))
            }
        }
    }

    /// One logical request: cache lookup, then the retry loop, then a
    /// write-once cache insert.
    fn call(&self, payload: &serde_json::Value) -> Result<serde_json::Value, BackendError> {
        let payload_text = serde_json::to_string(payload).expect("payload serializes");
        let backend_id = self.id();
        if let Some(cached) = self
            .cache
            .get(&backend_id, &payload_text)
            .map_err(Self::cache_error)?
        {
            self.stats.lock().expect("stats lock").cache_hits += 1;
            return Self::parse_body(&cached);
        }

        let timeout = Duration::from_millis(self.config.timeout_ms);
        let attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                self.stats.lock().expect("stats lock").retries += 1;
                (self.sleep)(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
            }
            self.stats.lock().expect("stats lock").network_calls += 1;
            match self.transport.post(
                &self.endpoint(),
                &self.config.api_key,
                &payload_text,
                timeout,
            ) {
                Ok(response) if (200..300).contains(&response.status) => {
                    let parsed = Self::parse_body(&response.body)?;
                    self.cache
                        .put(&backend_id, &payload_text, &response.body)
                        .map_err(Self::cache_error)?;
                    return Ok(parsed);
                }
                Ok(response) if response.status >= 500 => {
                    last_error = format!("HTTP {}: {}", response.status, excerpt(&response.body));
                }
                Ok(response) => {
                    return Err(BackendError::HttpStatus {
                        status: response.status,
                        body_excerpt: excerpt(&response.body),
                    });
                }
                Err(transport_error) => last_error = transport_error,
            }
        }
        Err(BackendError::Exhausted {
            attempts,
            message: last_error,
        })
    }

    fn parse_body(body: &str) -> Result<serde_json::Value, BackendError> {
        let value: serde_json::Value = serde_json::from_str(body)
            .map_err(|e| BackendError::Remote(format!("unparseable response: {e}")))?;
        match value.get("ok").and_then(serde_json::Value::as_bool) {
            Some(true) => Ok(value),
            Some(false) => Err(BackendError::Remote(
                value
                    .get("error")
                    .and_then(serde_json::Value::as_str)
                    .unwrap_or("unspecified error")
                    .to_owned(),
            )),
            None => Err(BackendError::Remote(
                "response is missing the `ok` field".into(),
            )),
        }
    }

    fn number_response(&self, payload: &serde_json::Value) -> Result<f64, BackendError> {
        let value = self.call(payload)?;
        value
            .get("value")
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| BackendError::Remote("response is missing a numeric `value`".into()))
    }
}

impl<T: Transport> ScoringBackend for HttpScoringBackend<T> {
    fn id(&self) -> String {
        format!("http:{}@{}", self.config.model_id, self.config.base_url)
    }

    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        if word.trim().is_empty() {
            return Err(BackendError::EmptyWord);
        }
        let payload = serde_json::json!({
            "mode": "fill",
            "model": self.config.model_id,
            "text": prompt.text(),
            "word": word,
        });
        Probability::new(self.number_response(&payload)?)
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        if select_core::tokenize(text).is_empty() {
            return Err(BackendError::EmptyText);
        }
        let payload = serde_json::json!({
            "mode": "ppl",
            "model": self.config.model_id,
            "text": text,
        });
        PerplexityValue::new(self.number_response(&payload)?)
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.trim().is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        let payload = serde_json::json!({
            "mode": "complete",
            "model": self.config.model_id,
            "text": prompt,
        });
        let value = self.call(&payload)?;
        value
            .get("text")
            .and_then(serde_json::Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| BackendError::Remote("response is missing `text`".into()))
    }
}
