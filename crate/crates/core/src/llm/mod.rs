//! Backend-agnostic chat-completion access.
//!
//! A [`Client`] wraps one [`Backend`] (remote HTTP API, scripted mock, or
//! replay-from-cache) and adds retry with exponential backoff, a global
//! in-flight bound, and a content-addressed response cache keyed by
//! [`cache_key`].

mod cache;
mod mock;
mod remote;

pub use cache::{CacheEntry, ResponseCache};
pub use mock::{CannedResponse, Matcher, MockRule, ScriptedMock};
pub use remote::RemoteChatApi;

use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Message role in a chat exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// A chat-completion request. Temperature defaults to 0 so that runs are
/// deterministic end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    pub fn new(model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        ChatRequest {
            model: model.into(),
            messages,
            temperature: 0.0,
            max_tokens: None,
        }
    }

    /// Single-user-message convenience constructor.
    pub fn user(model: impl Into<String>, content: impl Into<String>) -> Self {
        ChatRequest::new(model, vec![ChatMessage::user(content)])
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest(
                "messages must be non-empty".into(),
            ));
        }
        if self.messages[0].role == Role::Assistant {
            return Err(LlmError::InvalidRequest(
                "first message role must be system or user".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(LlmError::InvalidRequest("temperature must be >= 0".into()));
        }
        Ok(())
    }

    /// Concatenated message contents, the text mock matchers run against.
    pub fn match_target(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// A completed chat exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
    pub cache_hit: bool,
    /// Backend calls made to obtain this response, counting retries.
    /// Zero for cache hits.
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("authentication failed: {0}")]
    Authentication(String),
    #[error("request too large: {0}")]
    RequestTooLarge(String),
    #[error("retries exhausted after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: String },
    #[error("no mock rule matched request starting {head:?}")]
    MockMiss { head: String },
    #[error("replay cache miss for request digest {digest}")]
    CacheMiss { digest: String },
    #[error("backend error: {0}")]
    Backend(String),
    #[error("cache i/o: {0}")]
    CacheIo(#[from] std::io::Error),
    #[error("credentials environment variable {0} is not set")]
    MissingCredentials(String),
}

/// One backend call outcome, before retry handling.
#[derive(Debug)]
pub(crate) struct TransportReply {
    pub content: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug)]
pub(crate) struct TransportError {
    pub retryable: bool,
    pub error: LlmError,
}

impl TransportError {
    pub fn fatal(error: LlmError) -> Self {
        TransportError {
            retryable: false,
            error,
        }
    }

    pub fn transient(message: String) -> Self {
        TransportError {
            retryable: true,
            error: LlmError::Backend(message),
        }
    }
}

/// Where completions come from.
pub enum Backend {
    Remote(RemoteChatApi),
    Mock(ScriptedMock),
    /// Serve from the response cache only; never performs a call.
    ReplayCacheOnly,
}

impl Backend {
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::Remote(_) => "remote",
            Backend::Mock(_) => "mock",
            Backend::ReplayCacheOnly => "replay",
        }
    }
}

/// Exponential backoff schedule for transient failures.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub factor: f64,
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            max_delay: Duration::from_secs(30),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    /// No waiting between attempts; used with mocks in tests.
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy {
            max_attempts,
            base_delay: Duration::ZERO,
            factor: 1.0,
            max_delay: Duration::ZERO,
            jitter: false,
        }
    }

    /// Delay before retry number `attempt` (1-based: delay after the
    /// first failed attempt is `delay(1)`).
    fn delay(&self, attempt: u32) -> Duration {
        let exp =
            self.base_delay.as_secs_f64() * self.factor.powi(attempt.saturating_sub(1) as i32);
        let capped = exp.min(self.max_delay.as_secs_f64());
        let jittered = if self.jitter {
            // Half-jitter keeps a floor so retries still spread out.
            capped * (0.5 + 0.5 * rand::random::<f64>())
        } else {
            capped
        };
        Duration::from_secs_f64(jittered.max(0.0))
    }
}

/// Counting semaphore bounding concurrent in-flight backend calls.
pub struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    pub fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.cv.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }
}

pub struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        let mut permits = self.semaphore.permits.lock().unwrap();
        *permits += 1;
        self.semaphore.cv.notify_one();
    }
}

/// Client configuration.
#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub retry: RetryPolicy,
    /// Maximum concurrent in-flight backend calls.
    pub concurrency: usize,
    /// Cache directory; `None` disables caching (not allowed for replay).
    pub cache_dir: Option<PathBuf>,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            retry: RetryPolicy::default(),
            concurrency: 4,
            cache_dir: None,
        }
    }
}

/// Chat-completion client: one backend plus retry, rate bound, and cache.
pub struct Client {
    backend: Backend,
    cache: Option<ResponseCache>,
    retry: RetryPolicy,
    limiter: Semaphore,
}

impl Client {
    pub fn new(backend: Backend, options: ClientOptions) -> Result<Self, LlmError> {
        let cache = match &options.cache_dir {
            Some(dir) => Some(ResponseCache::open(dir)?),
            None => {
                if matches!(backend, Backend::ReplayCacheOnly) {
                    return Err(LlmError::InvalidRequest(
                        "replay backend requires a cache directory".into(),
                    ));
                }
                None
            }
        };
        Ok(Client {
            backend,
            cache,
            retry: options.retry,
            limiter: Semaphore::new(options.concurrency),
        })
    }

    /// Mock-backed client with no cache and no retry waits.
    pub fn mock(mock: ScriptedMock) -> Self {
        Client {
            backend: Backend::Mock(mock),
            cache: None,
            retry: RetryPolicy::immediate(5),
            limiter: Semaphore::new(8),
        }
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Complete a chat request.
    ///
    /// Cache lookup happens first when a cache is configured. Transient
    /// backend failures are retried with exponential backoff up to the
    /// attempt budget; every successful non-cached exchange is written to
    /// the cache before returning.
    pub fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        let digest = cache_key(req);

        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(&digest)? {
                return Ok(ChatResponse {
                    content: entry.content,
                    prompt_tokens: entry.prompt_tokens,
                    completion_tokens: entry.completion_tokens,
                    latency_ms: 0,
                    cache_hit: true,
                    attempts: 0,
                });
            }
        }

        if matches!(self.backend, Backend::ReplayCacheOnly) {
            return Err(LlmError::CacheMiss { digest });
        }

        let started = Instant::now();
        let mut attempts = 0u32;
        let reply = loop {
            attempts += 1;
            let outcome = {
                let _permit = self.limiter.acquire();
                match &self.backend {
                    Backend::Remote(remote) => remote.send(req),
                    Backend::Mock(mock) => mock.send(req),
                    Backend::ReplayCacheOnly => unreachable!("handled above"),
                }
            };
            match outcome {
                Ok(reply) => break reply,
                Err(err) if err.retryable && attempts < self.retry.max_attempts => {
                    std::thread::sleep(self.retry.delay(attempts));
                }
                Err(err) if err.retryable => {
                    return Err(LlmError::ExhaustedRetries {
                        attempts,
                        last: err.error.to_string(),
                    });
                }
                Err(err) => return Err(err.error),
            }
        };

        // Mock latency is pinned to zero so scripted runs stay
        // byte-reproducible.
        let latency_ms = match &self.backend {
            Backend::Mock(_) => 0,
            _ => started.elapsed().as_millis() as u64,
        };
        let response = ChatResponse {
            content: reply.content,
            prompt_tokens: reply.prompt_tokens,
            completion_tokens: reply.completion_tokens,
            latency_ms,
            cache_hit: false,
            attempts,
        };

        if let Some(cache) = &self.cache {
            cache.put(&digest, req, &response)?;
        }
        Ok(response)
    }
}

/// Canonical serialization used for the cache identity: fixed field order,
/// no whitespace, messages verbatim.
pub fn canonical_request_json(req: &ChatRequest) -> String {
    #[derive(Serialize)]
    struct CanonicalMessage<'a> {
        role: &'a str,
        content: &'a str,
    }
    #[derive(Serialize)]
    struct Canonical<'a> {
        model: &'a str,
        messages: Vec<CanonicalMessage<'a>>,
        temperature: f64,
        max_tokens: Option<u32>,
    }
    let canonical = Canonical {
        model: &req.model,
        messages: req
            .messages
            .iter()
            .map(|m| CanonicalMessage {
                role: match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                },
                content: &m.content,
            })
            .collect(),
        temperature: req.temperature,
        max_tokens: req.max_tokens,
    };
    serde_json::to_string(&canonical).expect("canonical form serializes")
}

/// Content address of a request: SHA-256 over [`canonical_request_json`],
/// stable across runs and platforms.
pub fn cache_key(req: &ChatRequest) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_request_json(req).as_bytes());
    hex::encode(hasher.finalize())
}

/// SHA-256 hex digest of arbitrary text; used for prompt-asset and config
/// provenance.
pub fn text_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hex::encode(hasher.finalize())
}
