//! Deterministic scripted backend for offline tests: an ordered rule table
//! mapping prompt matchers to canned responses, plus a call log and an
//! in-flight gauge so tests can observe pipeline behavior.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Deserialize;

use super::{ChatRequest, LlmError, TransportError, TransportReply};

/// How a rule matches the request text (message contents joined by `\n`).
#[derive(Debug, Clone)]
pub enum Matcher {
    Prefix(String),
    Substring(String),
    Regex(regex::Regex),
}

impl Matcher {
    fn matches(&self, target: &str) -> bool {
        match self {
            Matcher::Prefix(p) => target.starts_with(p.as_str()),
            Matcher::Substring(s) => target.contains(s.as_str()),
            Matcher::Regex(r) => r.is_match(target),
        }
    }
}

/// What a matched rule replies with.
#[derive(Debug, Clone)]
pub enum CannedResponse {
    Content(String),
    /// Simulated retryable failure (timeout / rate limit / 5xx).
    Transient(String),
    /// Simulated non-retryable failure.
    Fatal(String),
}

/// One scripted rule. First matching rule wins.
#[derive(Debug)]
pub struct MockRule {
    pub matcher: Matcher,
    pub response: CannedResponse,
    /// Respond with a transient error for this many matches before the
    /// canned response applies; exercises retry paths.
    fail_first: usize,
    failures_used: AtomicUsize,
}

impl MockRule {
    pub fn new(matcher: Matcher, response: CannedResponse) -> Self {
        MockRule {
            matcher,
            response,
            fail_first: 0,
            failures_used: AtomicUsize::new(0),
        }
    }

    pub fn prefix(pattern: impl Into<String>, content: impl Into<String>) -> Self {
        MockRule::new(
            Matcher::Prefix(pattern.into()),
            CannedResponse::Content(content.into()),
        )
    }

    pub fn substring(pattern: impl Into<String>, content: impl Into<String>) -> Self {
        MockRule::new(
            Matcher::Substring(pattern.into()),
            CannedResponse::Content(content.into()),
        )
    }

    /// Regex rule; panics on an invalid pattern (test construction error).
    pub fn regex(pattern: &str, content: impl Into<String>) -> Self {
        MockRule::new(
            Matcher::Regex(regex::Regex::new(pattern).expect("valid regex")),
            CannedResponse::Content(content.into()),
        )
    }

    pub fn failing_first(mut self, times: usize) -> Self {
        self.fail_first = times;
        self
    }
}

/// Concurrency gauge shared with tests.
#[derive(Debug, Default)]
pub struct Gauge {
    current: AtomicUsize,
    high_water: AtomicUsize,
}

impl Gauge {
    fn enter(&self) {
        let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.high_water.fetch_max(now, Ordering::SeqCst);
    }

    fn exit(&self) {
        self.current.fetch_sub(1, Ordering::SeqCst);
    }

    /// Highest number of simultaneously in-flight calls observed.
    pub fn max_in_flight(&self) -> usize {
        self.high_water.load(Ordering::SeqCst)
    }
}

/// Scripted mock backend. Fully deterministic: the same request sequence
/// always produces the same responses.
pub struct ScriptedMock {
    rules: Vec<MockRule>,
    log: Mutex<Vec<ChatRequest>>,
    gauge: Arc<Gauge>,
    delay: Duration,
}

impl ScriptedMock {
    pub fn new(rules: Vec<MockRule>) -> Self {
        ScriptedMock {
            rules,
            log: Mutex::new(Vec::new()),
            gauge: Arc::new(Gauge::default()),
            delay: Duration::ZERO,
        }
    }

    /// Echo mock: replies to anything with the fixed content.
    pub fn always(content: impl Into<String>) -> Self {
        ScriptedMock::new(vec![MockRule::prefix("", content)])
    }

    /// Artificial per-call delay, making concurrency observable in tests.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn gauge(&self) -> Arc<Gauge> {
        Arc::clone(&self.gauge)
    }

    /// All requests seen so far, in arrival order.
    pub fn calls(&self) -> Vec<ChatRequest> {
        self.log.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().unwrap().len()
    }

    /// Load rules from a JSON script: an array of
    /// `{"match": "prefix"|"substring"|"regex", "pattern": "...",
    ///   "response": "...", "kind": "content"|"transient"|"fatal",
    ///   "fail_first": 0}`.
    /// `kind` defaults to `content`.
    pub fn from_script(json: &str) -> Result<Self, LlmError> {
        #[derive(Deserialize)]
        struct ScriptRule {
            #[serde(rename = "match")]
            match_type: String,
            pattern: String,
            #[serde(default)]
            response: String,
            #[serde(default = "default_kind")]
            kind: String,
            #[serde(default)]
            fail_first: usize,
        }
        fn default_kind() -> String {
            "content".to_string()
        }

        let raw: Vec<ScriptRule> = serde_json::from_str(json)
            .map_err(|e| LlmError::InvalidRequest(format!("bad mock script: {e}")))?;
        let mut rules = Vec::with_capacity(raw.len());
        for r in raw {
            let matcher = match r.match_type.as_str() {
                "prefix" => Matcher::Prefix(r.pattern),
                "substring" => Matcher::Substring(r.pattern),
                "regex" => Matcher::Regex(
                    regex::Regex::new(&r.pattern)
                        .map_err(|e| LlmError::InvalidRequest(format!("bad mock regex: {e}")))?,
                ),
                other => {
                    return Err(LlmError::InvalidRequest(format!(
                        "unknown mock match type {other:?}"
                    )))
                }
            };
            let response = match r.kind.as_str() {
                "content" => CannedResponse::Content(r.response),
                "transient" => CannedResponse::Transient(r.response),
                "fatal" => CannedResponse::Fatal(r.response),
                other => {
                    return Err(LlmError::InvalidRequest(format!(
                        "unknown mock response kind {other:?}"
                    )))
                }
            };
            rules.push(MockRule::new(matcher, response).failing_first(r.fail_first));
        }
        Ok(ScriptedMock::new(rules))
    }

    pub(crate) fn send(&self, req: &ChatRequest) -> Result<TransportReply, TransportError> {
        self.log.lock().unwrap().push(req.clone());
        self.gauge.enter();
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let target = req.match_target();
        let result = self.respond(&target);
        self.gauge.exit();
        result
    }

    fn respond(&self, target: &str) -> Result<TransportReply, TransportError> {
        for rule in &self.rules {
            if !rule.matcher.matches(target) {
                continue;
            }
            if rule.failures_used.fetch_add(1, Ordering::SeqCst) < rule.fail_first {
                return Err(TransportError::transient(
                    "scripted transient failure".into(),
                ));
            }
            return match &rule.response {
                CannedResponse::Content(content) => Ok(TransportReply {
                    content: content.clone(),
                    // Deterministic stand-in token accounting.
                    prompt_tokens: target.chars().count() as u64,
                    completion_tokens: content.chars().count() as u64,
                }),
                CannedResponse::Transient(msg) => Err(TransportError::transient(msg.clone())),
                CannedResponse::Fatal(msg) => {
                    Err(TransportError::fatal(LlmError::Backend(msg.clone())))
                }
            };
        }
        let head: String = target.chars().take(60).collect();
        Err(TransportError::fatal(LlmError::MockMiss { head }))
    }
}
