//! Remote chat-completions backend speaking the de-facto open chat API
//! shape: POST `{model, messages, temperature, max_tokens}` and read the
//! first candidate message back.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{ChatRequest, LlmError, TransportError, TransportReply};

pub struct RemoteChatApi {
    endpoint: String,
    api_key: String,
    http: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ApiResponse {
    choices: Vec<ApiChoice>,
    #[serde(default)]
    usage: Option<ApiUsage>,
}

#[derive(Deserialize)]
struct ApiChoice {
    message: ApiMessage,
}

#[derive(Deserialize)]
struct ApiMessage {
    content: String,
}

#[derive(Deserialize, Default)]
struct ApiUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl RemoteChatApi {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Result<Self, LlmError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| LlmError::Backend(e.to_string()))?;
        Ok(RemoteChatApi {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            http,
        })
    }

    /// Read credentials from the named environment variable.
    pub fn from_env(endpoint: impl Into<String>, key_var: &str) -> Result<Self, LlmError> {
        let api_key = std::env::var(key_var)
            .map_err(|_| LlmError::MissingCredentials(key_var.to_string()))?;
        RemoteChatApi::new(endpoint, api_key)
    }

    pub(crate) fn send(&self, req: &ChatRequest) -> Result<TransportReply, TransportError> {
        let body = json!({
            "model": req.model,
            "messages": req.messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let result = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send();

        let response = match result {
            Ok(r) => r,
            Err(e) if e.is_timeout() || e.is_connect() => {
                return Err(TransportError::transient(format!("network: {e}")))
            }
            Err(e) => return Err(TransportError::fatal(LlmError::Backend(e.to_string()))),
        };

        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            let snippet: String = text.chars().take(200).collect();
            return Err(classify_status(status.as_u16(), snippet));
        }

        let parsed: ApiResponse = match response.json() {
            Ok(p) => p,
            Err(e) => {
                return Err(TransportError::fatal(LlmError::Backend(format!(
                    "malformed response: {e}"
                ))))
            }
        };
        let first = parsed.choices.into_iter().next().ok_or_else(|| {
            TransportError::fatal(LlmError::Backend("response has no candidates".into()))
        })?;
        if first.message.content.is_empty() {
            return Err(TransportError::fatal(LlmError::Backend(
                "candidate content is empty".into(),
            )));
        }
        let usage = parsed.usage.unwrap_or_default();
        Ok(TransportReply {
            content: first.message.content,
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
        })
    }
}

fn classify_status(status: u16, body: String) -> TransportError {
    match status {
        401 | 403 => {
            TransportError::fatal(LlmError::Authentication(format!("HTTP {status}: {body}")))
        }
        413 => TransportError::fatal(LlmError::RequestTooLarge(format!("HTTP {status}: {body}"))),
        429 => TransportError::transient(format!("rate limited (HTTP 429): {body}")),
        s if s >= 500 => TransportError::transient(format!("HTTP {s}: {body}")),
        s => TransportError::fatal(LlmError::Backend(format!("HTTP {s}: {body}"))),
    }
}
