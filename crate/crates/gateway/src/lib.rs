//! Uniform client for the model endpoints the pipeline talks to (the
//! evaluator, the judge, the data generator, the reward scorer).
//!
//! One [`Gateway`] owns all endpoint configuration and runs in one of three
//! modes: `live` (straight through), `record` (live, with every exchange
//! appended to a per-role cassette), or `replay` (served entirely from
//! cassettes; the network is never touched). Requests retry with
//! exponential backoff and jitter, and at most `max_in_flight` requests are
//! outstanding at once. Results are keyed by request identity, so
//! completion order never changes what a caller sees.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod cassette;
pub mod request;
pub mod testing;
pub mod transport;

pub use request::{ChatMessage, ChatRequest, DecodeParams, EndpointRole};
use transport::{extract_choices, Transport, TransportError};

/// How the gateway satisfies requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    Live,
    Record,
    Replay,
}

/// One remote endpoint. The credential can be given directly or named via
/// an environment variable (resolved at gateway construction).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

/// Retry behavior for live traffic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 5, base_delay_ms: 250, max_delay_ms: 8_000, jitter: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GatewayConfig {
    pub mode: GatewayMode,
    #[serde(default)]
    pub endpoints: BTreeMap<EndpointRole, EndpointConfig>,
    /// Per-role cassette files (replay source / record sink).
    #[serde(default)]
    pub cassettes: BTreeMap<EndpointRole, PathBuf>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "RetryPolicy::default")]
    pub retry: RetryPolicy,
}

fn default_in_flight() -> usize {
    4
}

impl GatewayConfig {
    pub fn replay(cassettes: BTreeMap<EndpointRole, PathBuf>) -> Self {
        GatewayConfig {
            mode: GatewayMode::Replay,
            endpoints: BTreeMap::new(),
            cassettes,
            max_in_flight: default_in_flight(),
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no endpoint configured for role {role}")]
    MissingEndpoint { role: &'static str },
    #[error("no cassette configured for role {role} in replay mode")]
    MissingCassette { role: &'static str },
    #[error("cassette miss for fingerprint {fingerprint}")]
    CassetteMiss { fingerprint: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("endpoint failed after {attempts} attempts: {message}")]
    Endpoint { attempts: u32, message: String },
    #[error("cassette {path}: {message}")]
    Cassette { path: String, message: String },
}

/// The shared client. Cheap to clone behind an [`Arc`].
pub struct Gateway {
    config: GatewayConfig,
    transport: Arc<dyn Transport>,
    replay: Mutex<HashMap<EndpointRole, cassette::ReplayState>>,
    limiter: tokio::sync::Semaphore,
}

impl Gateway {
    /// Builds a gateway with the HTTPS transport.
    pub fn new(config: GatewayConfig) -> Result<Self, GatewayError> {
        Self::with_transport(config, Arc::new(transport::HttpTransport::new()))
    }

    /// Builds a gateway over a caller-supplied transport (tests use this to
    /// intercept or count traffic).
    pub fn with_transport(
        mut config: GatewayConfig,
        transport: Arc<dyn Transport>,
    ) -> Result<Self, GatewayError> {
        for endpoint in config.endpoints.values_mut() {
            if endpoint.api_key.is_none() {
                if let Some(var) = &endpoint.api_key_env {
                    endpoint.api_key = std::env::var(var).ok();
                }
            }
        }
        let mut replay = HashMap::new();
        if config.mode == GatewayMode::Replay {
            for (role, path) in &config.cassettes {
                replay.insert(*role, cassette::ReplayState::load(path)?);
            }
        }
        let limiter = tokio::sync::Semaphore::new(config.max_in_flight.max(1));
        Ok(Gateway { config, transport, replay: Mutex::new(replay), limiter })
    }

    pub fn mode(&self) -> GatewayMode {
        self.config.mode
    }

    /// Completes one request, returning `n_samples` response texts. In
    /// replay mode this never performs network operations.
    pub async fn complete(&self, request: &ChatRequest) -> Result<Vec<String>, GatewayError> {
        if request.params.n_samples < 1 {
            return Err(GatewayError::InvalidRequest("n_samples must be at least 1".into()));
        }
        if request.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("empty message list".into()));
        }
        match self.config.mode {
            GatewayMode::Replay => self.replay_one(request),
            GatewayMode::Live | GatewayMode::Record => self.live_one(request).await,
        }
    }

    fn replay_one(&self, request: &ChatRequest) -> Result<Vec<String>, GatewayError> {
        let fingerprint = request.fingerprint();
        let mut replay = self.replay.lock().expect("replay state poisoned");
        let state = replay
            .get_mut(&request.role)
            .ok_or(GatewayError::MissingCassette { role: request.role.as_str() })?;
        state
            .take(&fingerprint)
            .ok_or(GatewayError::CassetteMiss { fingerprint })
    }

    async fn live_one(&self, request: &ChatRequest) -> Result<Vec<String>, GatewayError> {
        let endpoint = self
            .config
            .endpoints
            .get(&request.role)
            .ok_or(GatewayError::MissingEndpoint { role: request.role.as_str() })?;

        let mut body = serde_json::json!({
            "messages": request.messages,
            "temperature": request.params.temperature,
            "top_p": request.params.top_p,
            "n": request.params.n_samples,
            "max_tokens": request.params.max_tokens,
        });
        if let Some(model) = &endpoint.model {
            body["model"] = serde_json::Value::String(model.clone());
        }

        let _permit = self.limiter.acquire().await.expect("semaphore closed");

        let retry = self.config.retry;
        let mut attempt = 0u32;
        let responses = loop {
            attempt += 1;
            match self.transport.send(endpoint, body.clone()).await {
                Ok(reply) => match extract_choices(&reply) {
                    Ok(texts) => break texts,
                    Err(e) => {
                        return Err(GatewayError::Endpoint { attempts: attempt, message: e.to_string() })
                    }
                },
                Err(TransportError::Fatal(message)) => {
                    return Err(GatewayError::Endpoint { attempts: attempt, message })
                }
                Err(error @ (TransportError::RateLimited | TransportError::Retryable(_))) => {
                    if attempt >= retry.max_attempts {
                        return Err(match error {
                            TransportError::RateLimited => {
                                GatewayError::RateLimited { attempts: attempt }
                            }
                            other => GatewayError::Endpoint {
                                attempts: attempt,
                                message: other.to_string(),
                            },
                        });
                    }
                    let exp = retry.base_delay_ms.saturating_mul(1u64 << (attempt - 1).min(16));
                    let mut delay = exp.min(retry.max_delay_ms);
                    if retry.jitter && delay > 0 {
                        delay += rand::thread_rng().gen_range(0..=delay / 2);
                    }
                    tracing::debug!(role = request.role.as_str(), attempt, delay_ms = delay, "retrying");
                    tokio::time::sleep(Duration::from_millis(delay)).await;
                }
            }
        };

        if self.config.mode == GatewayMode::Record {
            if let Some(path) = self.config.cassettes.get(&request.role) {
                cassette::append_record(
                    path,
                    &cassette::CassetteRecord::new(request, responses.clone()),
                )?;
            }
        }
        Ok(responses)
    }

    /// Runs many requests with bounded concurrency, preserving input order
    /// in the output regardless of completion order.
    pub async fn complete_all(
        self: &Arc<Self>,
        requests: Vec<ChatRequest>,
    ) -> Vec<Result<Vec<String>, GatewayError>> {
        let mut handles = Vec::with_capacity(requests.len());
        for request in requests {
            let gateway = Arc::clone(self);
            handles.push(tokio::spawn(async move { gateway.complete(&request).await }));
        }
        let mut results = Vec::with_capacity(handles.len());
        for handle in handles {
            results.push(handle.await.expect("request task panicked"));
        }
        results
    }
}

/// Queue-backed responses keyed by fingerprint, used by the test transports.
pub(crate) type ResponseQueue = Mutex<VecDeque<serde_json::Value>>;
