//! Description sources: an OpenAI-compatible chat-completions client and a
//! deterministic stub.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding the endpoint's bearer token.
pub const API_KEY_ENV: &str = "ARISE_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmEndpointConfig {
    pub base_url: String,
    pub model: String,
    #[serde(skip)]
    pub api_key: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_seconds: u64,
    /// First retry delay; doubles per attempt.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_retries() -> u32 {
    3
}

fn default_timeout() -> u64 {
    60
}

fn default_backoff() -> u64 {
    500
}

impl LlmEndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            temperature: 0.0,
            max_retries: default_retries(),
            timeout_seconds: default_timeout(),
            backoff_ms: default_backoff(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(Error::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.timeout_seconds == 0 {
            return Err(Error::Config("timeout_seconds must be positive".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(Error::Config(format!(
                "endpoint {:?} is not an http(s) URL",
                self.base_url
            )));
        }
        Ok(())
    }
}

/// What a description source is asked about.
#[derive(Debug, Clone, Copy)]
pub struct ValueQuery<'a> {
    pub attribute: &'a str,
    pub value: &'a str,
    pub domain: &'a [String],
    pub prompt: &'a str,
}

pub trait DescriptionSource: Sync {
    /// Identity recorded alongside every description.
    fn model(&self) -> &str;

    fn describe(&self, query: &ValueQuery<'_>) -> Result<String>;
}

/// Deterministic offline source used by tests and timing sweeps.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubSource;

pub const STUB_MODEL: &str = "stub";

impl StubSource {
    pub fn render(attribute: &str, value: &str, domain: &[String]) -> String {
        format!("VALUE {value} OF {attribute} AMONG {}", domain.join(", "))
    }
}

impl DescriptionSource for StubSource {
    fn model(&self) -> &str {
        STUB_MODEL
    }

    fn describe(&self, q: &ValueQuery<'_>) -> Result<String> {
        Ok(Self::render(q.attribute, q.value, q.domain))
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    #[serde(default)]
    content: Option<String>,
}

/// Blocking client for `POST {base_url}/chat/completions`.
pub struct ChatClient {
    cfg: LlmEndpointConfig,
    agent: ureq::Agent,
}

impl ChatClient {
    pub fn new(cfg: LlmEndpointConfig) -> Result<Self> {
        cfg.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_seconds)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { cfg, agent })
    }

    pub fn config(&self) -> &LlmEndpointConfig {
        &self.cfg
    }

    /// Sends one prompt and returns the trimmed completion text.
    pub fn complete(&self, prompt: &str) -> Result<String> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let body = ChatRequest {
            model: &self.cfg.model,
            temperature: self.cfg.temperature,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
        };

        let mut last_err = String::new();
        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                let delay = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(10));
                std::thread::sleep(Duration::from_millis(delay));
            }
            let mut req = self.agent.post(&url);
            if let Some(key) = &self.cfg.api_key {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
            let mut resp = match req.send_json(&body) {
                Ok(r) => r,
                Err(e) => {
                    last_err = e.to_string();
                    log::warn!("request to {url} failed (attempt {}): {e}", attempt + 1);
                    continue;
                }
            };
            let status = resp.status().as_u16();
            if status == 429 || status >= 500 {
                last_err = format!("HTTP {status}");
                log::warn!("{url} answered {status} (attempt {})", attempt + 1);
                continue;
            }
            if !(200..300).contains(&status) {
                let text = resp.body_mut().read_to_string().unwrap_or_default();
                return Err(Error::Transport(format!("HTTP {status}: {text}")));
            }
            let parsed: ChatResponse = resp
                .body_mut()
                .read_json()
                .map_err(|e| Error::Transport(format!("unreadable completion: {e}")))?;
            let text = parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .unwrap_or_default();
            let text = text.trim();
            if text.is_empty() {
                return Err(Error::EmptyDescription);
            }
            return Ok(text.to_string());
        }
        Err(Error::Transport(format!(
            "giving up after {} attempts: {last_err}",
            self.cfg.max_retries + 1
        )))
    }
}

impl DescriptionSource for ChatClient {
    fn model(&self) -> &str {
        &self.cfg.model
    }

    fn describe(&self, q: &ValueQuery<'_>) -> Result<String> {
        self.complete(q.prompt)
    }
}

/// One-shot form of [`ChatClient::complete`].
pub fn describe_value(cfg: &LlmEndpointConfig, prompt: &str) -> Result<String> {
    ChatClient::new(cfg.clone())?.complete(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stub_is_deterministic() {
        let domain = vec!["a".to_string(), "b".to_string()];
        let q = ValueQuery {
            attribute: "x",
            value: "a",
            domain: &domain,
            prompt: "",
        };
        assert_eq!(StubSource.describe(&q).unwrap(), "VALUE a OF x AMONG a, b");
    }

    #[test]
    fn config_validation() {
        let mut cfg = LlmEndpointConfig::new("http://localhost:1", "m");
        assert!(cfg.validate().is_ok());
        cfg.temperature = -0.5;
        assert!(cfg.validate().is_err());
        cfg.temperature = 0.0;
        cfg.base_url = "localhost".into();
        assert!(cfg.validate().is_err());
    }
}
