//! Completion backends and the retrying request path.
//!
//! The wire protocol is deliberately minimal: HTTP POST of
//! `{"model": string, "prompt": string, "max_tokens": int}` answered by
//! `{"completion": string}`. Offline runs use a JSON-lines file keyed by
//! `(id, model)`, and tests register deterministic mocks by profile name.

use crate::dataset::Dataset;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

use super::ModelProfile;

#[derive(Debug, Error)]
pub enum BackendError {
    /// Worth retrying: timeouts, connection failures, 5xx/429 responses.
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("backend failure: {0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionRequest<'a> {
    pub model: &'a str,
    pub prompt: &'a str,
    pub max_tokens: usize,
    /// Not part of the wire protocol; lets offline and test backends key
    /// their answers.
    pub point_id: &'a str,
}

pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError>;
}

/// Always returns the same text, whatever the prompt.
pub struct ConstantBackend(pub String);

impl CompletionBackend for ConstantBackend {
    fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        Ok(self.0.clone())
    }
}

/// Test backend returning each point's ground truth, keyed by point id.
pub struct EchoGroundTruthBackend {
    truths: BTreeMap<String, String>,
}

impl EchoGroundTruthBackend {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        let truths = dataset
            .points
            .iter()
            .filter_map(|p| p.ground_truth.clone().map(|t| (p.point_id.clone(), t)))
            .collect();
        Self { truths }
    }
}

impl CompletionBackend for EchoGroundTruthBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        self.truths
            .get(request.point_id)
            .cloned()
            .ok_or_else(|| BackendError::Fatal(format!("no ground truth for `{}`", request.point_id)))
    }
}

#[derive(Deserialize)]
struct OfflineLine {
    id: String,
    model: String,
    completion: String,
}

/// Completions scripted ahead of time in a JSON-lines file with the fields
/// `id, model, completion`.
pub struct OfflineFileBackend {
    completions: BTreeMap<(String, String), String>,
}

impl OfflineFileBackend {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut completions = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: OfflineLine = serde_json::from_str(line)
                .map_err(|e| format!("completions file line {}: {e}", idx + 1))?;
            completions.insert((row.id, row.model), row.completion);
        }
        Ok(Self { completions })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }
}

impl CompletionBackend for OfflineFileBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        self.completions
            .get(&(request.point_id.to_string(), request.model.to_string()))
            .cloned()
            .ok_or_else(|| {
                BackendError::Fatal(format!(
                    "no offline completion for point `{}` model `{}`",
                    request.point_id, request.model
                ))
            })
    }
}

/// POSTs the minimal JSON body to `endpoint`; 5xx/429, timeouts, and
/// transport errors are transient, everything else fatal.
#[cfg(feature = "net")]
pub struct HttpBackend {
    pub endpoint: String,
    pub api_key_env: Option<String>,
    pub timeout: Duration,
}

#[cfg(feature = "net")]
impl CompletionBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build();
        let agent = ureq::Agent::new_with_config(config);
        let mut req = agent.post(&self.endpoint);
        if let Some(var) = &self.api_key_env {
            if let Ok(key) = std::env::var(var) {
                req = req.header("authorization", format!("Bearer {key}"));
            }
        }
        let body = serde_json::json!({
            "model": request.model,
            "prompt": request.prompt,
            "max_tokens": request.max_tokens,
        });
        let response = req.send_json(&body).map_err(|err| match err {
            ureq::Error::StatusCode(code) if code >= 500 || code == 429 => {
                BackendError::Transient(format!("http status {code}"))
            }
            ureq::Error::StatusCode(code) => BackendError::Fatal(format!("http status {code}")),
            ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::HostNotFound => {
                BackendError::Transient(err.to_string())
            }
            other => BackendError::Fatal(other.to_string()),
        })?;
        #[derive(Deserialize)]
        struct CompletionResponse {
            completion: String,
        }
        let parsed: CompletionResponse = response
            .into_body()
            .read_json()
            .map_err(|e| BackendError::Fatal(format!("malformed completion response: {e}")))?;
        Ok(parsed.completion)
    }
}

/// Backends by profile name. A registered mock wins; otherwise a profile
/// with an endpoint gets an HTTP backend.
#[derive(Clone)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn CompletionBackend>>,
    /// Fallback used for any profile without its own entry.
    default: Option<Arc<dyn CompletionBackend>>,
    http_timeout: Duration,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        Self { backends: BTreeMap::new(), default: None, http_timeout: Duration::from_secs(60) }
    }
}

impl BackendRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Per-request timeout for endpoint-backed profiles.
    pub fn set_http_timeout(&mut self, timeout: Duration) {
        self.http_timeout = timeout;
    }

    pub fn register(&mut self, model: impl Into<String>, backend: Arc<dyn CompletionBackend>) {
        self.backends.insert(model.into(), backend);
    }

    pub fn register_default(&mut self, backend: Arc<dyn CompletionBackend>) {
        self.default = Some(backend);
    }

    pub fn resolve(&self, profile: &ModelProfile) -> Result<Arc<dyn CompletionBackend>, BackendError> {
        if let Some(backend) = self.backends.get(&profile.name) {
            return Ok(backend.clone());
        }
        if let Some(backend) = &self.default {
            return Ok(backend.clone());
        }
        if let Some(endpoint) = &profile.endpoint {
            #[cfg(feature = "net")]
            {
                return Ok(Arc::new(HttpBackend {
                    endpoint: endpoint.clone(),
                    api_key_env: profile.api_key_env.clone(),
                    timeout: self.http_timeout,
                }));
            }
            #[cfg(not(feature = "net"))]
            {
                return Err(BackendError::Fatal(format!(
                    "profile `{}` wants endpoint `{endpoint}` but HTTP support is compiled out",
                    profile.name
                )));
            }
        }
        Err(BackendError::Fatal(format!(
            "no backend registered for model `{}` and no endpoint configured",
            profile.name
        )))
    }
}

/// How hard to retry transient failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, base_delay: Duration::from_millis(500) }
    }
}

/// One completion with retry: up to `max_retries` extra attempts on
/// transient failures, doubling the delay each time. Fatal errors return
/// immediately.
pub fn request_completion(
    profile: &ModelProfile,
    prompt: &str,
    point_id: &str,
    registry: &BackendRegistry,
    retry: &RetryPolicy,
) -> Result<String, BackendError> {
    let backend = registry.resolve(profile)?;
    let request = CompletionRequest {
        model: &profile.name,
        prompt,
        max_tokens: profile.max_new_units,
        point_id,
    };
    let mut attempt = 0u32;
    loop {
        match backend.complete(&request) {
            Ok(completion) => return Ok(completion),
            Err(BackendError::Transient(msg)) if attempt < retry.max_retries => {
                std::thread::sleep(retry.base_delay * 2u32.pow(attempt));
                attempt += 1;
                let _ = msg;
            }
            Err(err) => return Err(err),
        }
    }
}
