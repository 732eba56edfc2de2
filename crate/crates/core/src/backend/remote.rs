//! Chat-completions HTTP client with retry.

use std::time::Duration;

use chrono::Utc;
use rand::Rng;
use serde_json::{json, Value};

use super::{BackendConfig, BackendError, Explanation, ExplanationBackend, GenerationRequest};

/// Exponential backoff with "equal jitter": each delay is drawn from
/// `[d/2, d]` where `d = base * factor^(retry-1)`, capped at `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backoff {
    pub base: Duration,
    pub factor: f64,
    pub max: Duration,
    pub jitter: bool,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_secs(1),
            factor: 2.0,
            max: Duration::from_secs(60),
            jitter: true,
        }
    }
}

impl Backoff {
    /// Nominal (un-jittered) delay before retry number `retry` (1-based).
    pub fn nominal(&self, retry: u32) -> Duration {
        let scaled = self.base.as_secs_f64() * self.factor.powi(retry.saturating_sub(1) as i32);
        Duration::from_secs_f64(scaled.min(self.max.as_secs_f64()))
    }

    pub fn delay(&self, retry: u32) -> Duration {
        let nominal = self.nominal(retry);
        if !self.jitter || nominal.is_zero() {
            return nominal;
        }
        let half = nominal.as_secs_f64() / 2.0;
        Duration::from_secs_f64(half + rand::rng().random_range(0.0..=half))
    }
}

pub struct RemoteBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    temperature: f64,
    max_retries: u32,
    max_parallel: usize,
    system_message: String,
    api_key: String,
    backoff: Backoff,
}

impl RemoteBackend {
    pub fn from_config(config: &BackendConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.request_timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            agent,
            endpoint: config.endpoint_url.clone().unwrap_or_default(),
            model: config.model_name.clone(),
            temperature: config.temperature,
            max_retries: config.max_retries,
            max_parallel: config.max_parallel,
            system_message: config.system_message.clone(),
            api_key: config.api_key.clone().unwrap_or_default(),
            backoff: Backoff {
                base: Duration::from_millis(config.backoff_base_ms),
                ..Backoff::default()
            },
        })
    }

    pub fn with_backoff(mut self, backoff: Backoff) -> Self {
        self.backoff = backoff;
        self
    }

    fn request_body(&self, prompt: &str) -> Value {
        let mut messages = Vec::new();
        if !self.system_message.is_empty() {
            messages.push(json!({"role": "system", "content": self.system_message}));
        }
        messages.push(json!({"role": "user", "content": prompt}));
        json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": messages,
        })
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body);
        let mut response = match response {
            Ok(r) => r,
            Err(e) if is_transient(&e) => return Attempt::Retry(e.to_string()),
            Err(e) => return Attempt::Fail(BackendError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string();
        match status {
            200..=299 => match text {
                Ok(text) => match extract_content(&text) {
                    Ok(content) => Attempt::Done(content),
                    Err(e) => Attempt::Fail(e),
                },
                Err(e) => Attempt::Retry(format!("reading body: {e}")),
            },
            401 | 403 => Attempt::Auth(status),
            429 | 500..=599 => Attempt::Retry(format!("HTTP {status}")),
            _ => Attempt::Fail(BackendError::Rejected {
                status,
                body: text.unwrap_or_default().chars().take(500).collect(),
            }),
        }
    }
}

enum Attempt {
    Done(String),
    Retry(String),
    Auth(u16),
    Fail(BackendError),
}

fn is_transient(e: &ureq::Error) -> bool {
    matches!(
        e,
        ureq::Error::Timeout(_)
            | ureq::Error::Io(_)
            | ureq::Error::ConnectionFailed
            | ureq::Error::HostNotFound
            | ureq::Error::Protocol(_)
    )
}

/// Pulls `choices[0].message.content` out of a chat-completions response.
pub(crate) fn extract_content(body: &str) -> Result<String, BackendError> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| BackendError::MalformedResponse(format!("not JSON: {e}")))?;
    let content = value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::MalformedResponse("no choices[0].message.content".into()))?;
    if content.trim().is_empty() {
        return Err(BackendError::MalformedResponse("empty content".into()));
    }
    Ok(content.to_string())
}

impl ExplanationBackend for RemoteBackend {
    fn backend_id(&self) -> String {
        self.model.clone()
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<Explanation, BackendError> {
        let body = self.request_body(&request.prompt.rendered);
        let max_attempts = self.max_retries + 1;
        let mut last_status = String::new();
        for attempt in 1..=max_attempts {
            match self.attempt(&body) {
                Attempt::Done(text) => {
                    return Ok(Explanation {
                        text,
                        backend_id: self.model.clone(),
                        prompt_fingerprint: request.prompt.fingerprint(),
                        created_at: Some(Utc::now()),
                        attempt_count: attempt,
                    })
                }
                Attempt::Auth(status) => {
                    return Err(BackendError::Auth {
                        status,
                        attempts: attempt,
                    })
                }
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(status) => {
                    last_status = status;
                    if attempt < max_attempts {
                        std::thread::sleep(self.backoff.delay(attempt));
                    }
                }
            }
        }
        Err(BackendError::RetriesExhausted {
            attempts: max_attempts,
            last_status,
        })
    }

    fn max_parallel(&self) -> usize {
        self.max_parallel
    }
}
