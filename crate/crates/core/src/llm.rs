//! Chat-completion providers: an HTTP client for OpenAI-style endpoints and a
//! scripted mock for tests and offline use.

use std::fmt;
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const ENV_API_KEY: &str = "GP4NLDR_LLM_API_KEY";
pub const ENV_BASE_URL: &str = "GP4NLDR_LLM_BASE_URL";
pub const ENV_MODEL: &str = "GP4NLDR_LLM_MODEL";

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::User,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("the provider rejected the API key (HTTP {0}); check that a valid key is configured")]
    AuthFailure(u16),
    #[error("rate limited by the provider")]
    RateLimited,
    #[error("request timed out")]
    Timeout,
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("provider server error (HTTP {0})")]
    Server(u16),
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("no API key configured; set {ENV_API_KEY} or use the mock provider")]
    MissingApiKey,
    #[error("mock script exhausted after {0} replies")]
    ScriptExhausted(usize),
    #[error("no messages to send")]
    EmptyRequest,
}

impl LlmError {
    /// Stable machine-readable code for API responses.
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::AuthFailure(_) => "auth_failure",
            LlmError::RateLimited => "rate_limited",
            LlmError::Timeout => "timeout",
            LlmError::MalformedResponse(_) => "malformed_response",
            LlmError::Server(_) => "provider_server_error",
            LlmError::Http { .. } => "provider_http_error",
            LlmError::Transport(_) => "transport_error",
            LlmError::MissingApiKey => "missing_api_key",
            LlmError::ScriptExhausted(_) => "script_exhausted",
            LlmError::EmptyRequest => "empty_request",
        }
    }

    fn is_transient(&self) -> bool {
        matches!(
            self,
            LlmError::RateLimited | LlmError::Timeout | LlmError::Server(_) | LlmError::Transport(_)
        )
    }
}

pub trait ChatProvider: Send + Sync {
    /// Sends the conversation and returns the assistant's reply.
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError>;
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub base_url: String,
    #[serde(skip_serializing)]
    pub api_key: String,
    pub model_id: String,
    pub temperature: f64,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// Delay before the first retry; each further retry waits
    /// `backoff_factor` times longer.
    pub backoff_initial_ms: u64,
    pub backoff_factor: u32,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            base_url: DEFAULT_BASE_URL.to_string(),
            api_key: String::new(),
            model_id: DEFAULT_MODEL.to_string(),
            temperature: 0.0,
            timeout_secs: 60.0,
            max_retries: 2,
            backoff_initial_ms: 1000,
            backoff_factor: 4,
        }
    }
}

impl fmt::Debug for ProviderConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &if self.api_key.is_empty() { "" } else { "<redacted>" })
            .field("model_id", &self.model_id)
            .field("temperature", &self.temperature)
            .field("timeout_secs", &self.timeout_secs)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

impl ProviderConfig {
    /// Defaults overridden by the `GP4NLDR_LLM_*` environment variables.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Ok(key) = std::env::var(ENV_API_KEY) {
            cfg.api_key = key;
        }
        if let Ok(url) = std::env::var(ENV_BASE_URL) {
            cfg.base_url = url;
        }
        if let Ok(model) = std::env::var(ENV_MODEL) {
            cfg.model_id = model;
        }
        cfg
    }

    /// Wait before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = u64::from(self.backoff_factor).saturating_pow(retry.saturating_sub(1));
        Duration::from_millis(self.backoff_initial_ms.saturating_mul(factor))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err("temperature must be a finite value >= 0".into());
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err("timeout must be positive".into());
        }
        if self.model_id.trim().is_empty() {
            return Err("model id is empty".into());
        }
        Ok(())
    }
}

/// Blocking client for `POST {base_url}/chat/completions`.
pub struct HttpProvider {
    config: ProviderConfig,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn attempt(&self, body: &Value) -> Result<String, LlmError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let response = self
            .agent
            .post(&url)
            .header("Authorization", &format!("Bearer {}", self.config.api_key))
            .send_json(body);
        let mut response = match response {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(LlmError::Timeout),
            Err(e) => return Err(LlmError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Err(LlmError::Timeout),
            Err(e) => return Err(LlmError::Transport(e.to_string())),
        };
        match status {
            200..=299 => parse_completion(&text),
            401 | 403 => Err(LlmError::AuthFailure(status)),
            429 => Err(LlmError::RateLimited),
            500..=599 => Err(LlmError::Server(status)),
            _ => Err(LlmError::Http { status, body: text }),
        }
    }
}

impl ChatProvider for HttpProvider {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        if messages.is_empty() {
            return Err(LlmError::EmptyRequest);
        }
        if self.config.api_key.is_empty() {
            return Err(LlmError::MissingApiKey);
        }
        let body = json!({
            "model": self.config.model_id,
            "temperature": self.config.temperature,
            "messages": messages,
        });
        let mut retry = 0;
        loop {
            match self.attempt(&body) {
                Err(e) if e.is_transient() && retry < self.config.max_retries => {
                    retry += 1;
                    thread::sleep(self.config.backoff(retry));
                }
                other => return other,
            }
        }
    }
}

/// `choices[0].message.content` of a chat-completions response.
pub fn parse_completion(body: &str) -> Result<String, LlmError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LlmError::MalformedResponse("missing choices[0].message.content".into()))
}

/// One-shot helper over [`HttpProvider`].
pub fn complete_chat(cfg: &ProviderConfig, messages: &[ChatMessage]) -> Result<String, LlmError> {
    HttpProvider::new(cfg.clone()).complete(messages)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockReply {
    Text(String),
    Fail(LlmError),
}

#[derive(Debug)]
enum MockMode {
    Script(Vec<MockReply>),
    Echo,
}

/// Deterministic stand-in provider that records every request.
#[derive(Debug)]
pub struct MockProvider {
    mode: MockMode,
    state: Mutex<MockState>,
}

#[derive(Debug, Default)]
struct MockState {
    served: usize,
    requests: Vec<Vec<ChatMessage>>,
}

impl MockProvider {
    /// Replies with the given answers in order, then fails.
    pub fn script<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::replies(answers.into_iter().map(|a| MockReply::Text(a.into())).collect())
    }

    pub fn replies(replies: Vec<MockReply>) -> Self {
        Self {
            mode: MockMode::Script(replies),
            state: Mutex::default(),
        }
    }

    /// Replies with the last user message plus a digest of the whole request.
    pub fn echo() -> Self {
        Self {
            mode: MockMode::Echo,
            state: Mutex::default(),
        }
    }

    /// Every request received so far, oldest first.
    pub fn requests(&self) -> Vec<Vec<ChatMessage>> {
        self.state.lock().expect("mock state poisoned").requests.clone()
    }

    pub fn request_count(&self) -> usize {
        self.state.lock().expect("mock state poisoned").requests.len()
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        if messages.is_empty() {
            return Err(LlmError::EmptyRequest);
        }
        let mut state = self.state.lock().expect("mock state poisoned");
        state.requests.push(messages.to_vec());
        match &self.mode {
            MockMode::Echo => Ok(echo_reply(messages)),
            MockMode::Script(replies) => {
                let i = state.served;
                let reply = replies.get(i).cloned().ok_or(LlmError::ScriptExhausted(i))?;
                state.served += 1;
                match reply {
                    MockReply::Text(t) => Ok(t),
                    MockReply::Fail(e) => Err(e),
                }
            }
        }
    }
}

fn echo_reply(messages: &[ChatMessage]) -> String {
    let question = messages
        .iter()
        .rev()
        .find(|m| m.role == ChatRole::User)
        .map_or("", |m| m.content.as_str());
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut chars = 0usize;
    for m in messages {
        for b in m.content.bytes() {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        chars += m.content.chars().count();
    }
    format!("echo: {question} (prompt digest {hash:016x}, {chars} chars)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_in_order_then_exhausted() {
        let mock = MockProvider::script(["A", "B"]);
        let msgs = [ChatMessage::user("hi")];
        assert_eq!(mock.complete(&msgs).unwrap(), "A");
        assert_eq!(mock.complete(&msgs).unwrap(), "B");
        assert_eq!(mock.complete(&msgs), Err(LlmError::ScriptExhausted(2)));
        assert_eq!(mock.request_count(), 3);
    }

    #[test]
    fn echo_contains_question() {
        let mock = MockProvider::echo();
        let msgs = [ChatMessage::system("ctx"), ChatMessage::user("what is hue?")];
        let a = mock.complete(&msgs).unwrap();
        assert!(a.starts_with("echo: what is hue? (prompt digest "));
        assert_eq!(a, mock.complete(&msgs).unwrap());
    }

    #[test]
    fn api_key_is_not_serialized_or_debugged() {
        let cfg = ProviderConfig {
            api_key: "sk-secret-123".into(),
            ..ProviderConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(!json.contains("sk-secret"));
        assert!(!format!("{cfg:?}").contains("sk-secret"));
    }

    #[test]
    fn backoff_schedule() {
        let cfg = ProviderConfig::default();
        assert_eq!(cfg.backoff(1), Duration::from_secs(1));
        assert_eq!(cfg.backoff(2), Duration::from_secs(4));
    }

    #[test]
    fn completion_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"OK"}}]}"#;
        assert_eq!(parse_completion(ok).unwrap(), "OK");
        assert!(matches!(
            parse_completion(r#"{"choices":[]}"#),
            Err(LlmError::MalformedResponse(_))
        ));
        assert!(matches!(parse_completion("<html>"), Err(LlmError::MalformedResponse(_))));
    }

    #[test]
    fn missing_key_fails_before_any_request() {
        let p = HttpProvider::new(ProviderConfig {
            base_url: "http://127.0.0.1:9".into(),
            ..ProviderConfig::default()
        });
        assert_eq!(p.complete(&[ChatMessage::user("x")]), Err(LlmError::MissingApiKey));
    }
}
