//! Explanation backends: a remote chat-completions endpoint or the
//! deterministic offline generator, behind one trait.

mod cache;
mod offline;
mod remote;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheEntry, ResponseCache};
pub use offline::{offline_generate, offline_text, OfflineBackend, OFFLINE_BACKEND_ID};
pub use remote::{Backoff, RemoteBackend};

use crate::baseline::ProjectBaseline;
use crate::contextualizer::ClassRiskProfile;
use crate::prompt::PromptBundle;

/// Environment variable holding the remote API credential.
pub const API_KEY_ENV: &str = "RISKEXPLAIN_API_KEY";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("authentication failed (HTTP {status}) after {attempts} attempt(s)")]
    Auth { status: u16, attempts: u32 },
    #[error("gave up after {attempts} attempts; last status: {last_status}")]
    RetriesExhausted { attempts: u32, last_status: String },
    #[error("request rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed response body: {0}")]
    MalformedResponse(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("response cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    #[default]
    Offline,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "remote" => Ok(BackendKind::Remote),
            "offline" => Ok(BackendKind::Offline),
            other => Err(format!(
                "unknown backend `{other}` (expected remote or offline)"
            )),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Remote => "remote",
            BackendKind::Offline => "offline",
        })
    }
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub backend: BackendKind,
    pub endpoint_url: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub request_timeout_secs: u64,
    pub max_parallel: usize,
    /// First retry delay; doubles per attempt.
    pub backoff_base_ms: u64,
    /// Optional system message; none is sent when empty.
    pub system_message: String,
    /// Only ever read from [`API_KEY_ENV`].
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl fmt::Debug for BackendConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackendConfig")
            .field("backend", &self.backend)
            .field("endpoint_url", &self.endpoint_url)
            .field("model_name", &self.model_name)
            .field("temperature", &self.temperature)
            .field("max_retries", &self.max_retries)
            .field("request_timeout_secs", &self.request_timeout_secs)
            .field("max_parallel", &self.max_parallel)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            backend: BackendKind::Offline,
            endpoint_url: None,
            model_name: "gpt-5".to_string(),
            temperature: 0.0,
            max_retries: 3,
            request_timeout_secs: 60,
            max_parallel: 4,
            backoff_base_ms: 1000,
            system_message: String::new(),
            api_key: None,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(BackendError::Config("temperature must be >= 0".into()));
        }
        if self.max_parallel == 0 {
            return Err(BackendError::Config("max_parallel must be >= 1".into()));
        }
        if self.backend == BackendKind::Remote {
            if self.endpoint_url.as_deref().is_none_or(str::is_empty) {
                return Err(BackendError::Config(
                    "remote backend requires an endpoint URL".into(),
                ));
            }
            if self.api_key.as_deref().is_none_or(str::is_empty) {
                return Err(BackendError::Config(format!(
                    "remote backend requires the {API_KEY_ENV} environment variable"
                )));
            }
        }
        Ok(())
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs(self.request_timeout_secs)
    }

    /// Identifier recorded on explanations and used in cache keys.
    pub fn backend_id(&self) -> String {
        match self.backend {
            BackendKind::Offline => OFFLINE_BACKEND_ID.to_string(),
            BackendKind::Remote => self.model_name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub text: String,
    pub backend_id: String,
    pub prompt_fingerprint: String,
    /// Set for remote responses; the offline generator is clock-free.
    pub created_at: Option<DateTime<Utc>>,
    /// Requests made to produce this text (0 when served from cache).
    pub attempt_count: u32,
}

/// Everything a backend may need for one class.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub prompt: &'a PromptBundle,
    pub profile: &'a ClassRiskProfile,
    pub baseline: &'a ProjectBaseline,
}

pub trait ExplanationBackend: Send + Sync {
    fn backend_id(&self) -> String;

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<Explanation, BackendError>;

    /// Deterministic backends are never asked to regenerate and are not cached.
    fn is_deterministic(&self) -> bool {
        false
    }

    fn max_parallel(&self) -> usize {
        1
    }
}

pub fn build_backend(config: &BackendConfig) -> Result<Box<dyn ExplanationBackend>, BackendError> {
    config.validate()?;
    Ok(match config.backend {
        BackendKind::Offline => Box::new(OfflineBackend),
        BackendKind::Remote => Box::new(RemoteBackend::from_config(config)?),
    })
}

/// One-shot generation through the backend described by `config`.
pub fn generate(
    request: &GenerationRequest<'_>,
    config: &BackendConfig,
) -> Result<Explanation, BackendError> {
    build_backend(config)?.generate(request)
}

/// Maps `f` over `items` with at most `max_parallel` calls in flight;
/// results come back in input order.
pub fn parallel_map<T, R, F>(items: &[T], max_parallel: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let workers = max_parallel.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(i, &items[i]);
                slots.lock().expect("result slots poisoned")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every index is processed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remote_config_needs_endpoint_and_key() {
        let mut config = BackendConfig {
            backend: BackendKind::Remote,
            ..Default::default()
        };
        assert!(matches!(config.validate(), Err(BackendError::Config(_))));
        config.endpoint_url = Some("http://localhost:1/v1/chat/completions".into());
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains(API_KEY_ENV));
        config.api_key = Some("k".into());
        assert!(config.validate().is_ok());
        assert!(!format!("{config:?}").contains("\"k\""));
    }

    #[test]
    fn backend_ids() {
        let mut config = BackendConfig::default();
        assert_eq!(config.backend_id(), "offline-v1");
        config.backend = BackendKind::Remote;
        config.model_name = "m".into();
        assert_eq!(config.backend_id(), "m");
    }

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<u64> = (0..50).collect();
        let out = parallel_map(&items, 8, |i, v| {
            std::thread::sleep(Duration::from_micros((50 - v) * 20));
            (i, v * 2)
        });
        for (i, (idx, doubled)) in out.iter().enumerate() {
            assert_eq!(*idx, i);
            assert_eq!(*doubled, items[i] * 2);
        }
        assert!(parallel_map(&Vec::<u8>::new(), 4, |_, v| *v).is_empty());
    }

    #[test]
    fn parallel_map_respects_limit() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let live = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        let items = vec![(); 32];
        parallel_map(&items, 3, |_, _| {
            let now = live.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(2));
            live.fetch_sub(1, Ordering::SeqCst);
        });
        assert!(peak.load(Ordering::SeqCst) <= 3);
    }
}
