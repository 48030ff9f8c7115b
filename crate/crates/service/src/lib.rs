//! The evaluation service: every pipeline operation exposed over HTTP/JSON.
//!
//! The deterministic operations (parse, render, score, check, feedback,
//! pairs, rerank, metaeval, significance) are pure functions of the request
//! body. The model-backed operations (evaluate, judge run, reward, datagen)
//! go through the shared [`xeval_gateway::Gateway`], whose mode (live,
//! record, replay) is fixed by the server configuration.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use xeval_gateway::transport::Transport;
use xeval_gateway::{Gateway, GatewayConfig, GatewayMode};

pub mod error;
pub mod handlers;
mod llm_handlers;

pub use error::ServiceError;

/// Server configuration, usually loaded from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServerConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub gateway: GatewayConfig,
}

fn default_bind() -> String {
    "127.0.0.1:8080".to_string()
}

impl ServerConfig {
    pub fn from_file(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ServiceError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: ServerConfig = serde_json::from_str(&text).map_err(|e| {
            ServiceError::Config(format!("cannot parse config {}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Replay mode must not name live endpoints.
    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.gateway.mode == GatewayMode::Replay && !self.gateway.endpoints.is_empty() {
            return Err(ServiceError::Config(
                "replay mode forbids live endpoints; remove the endpoints section".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct AppState {
    pub gateway: Arc<Gateway>,
}

/// Builds the full router over a ready gateway.
pub fn router(gateway: Arc<Gateway>) -> Router {
    let state = AppState { gateway };
    Router::new()
        .route("/health", get(handlers::health))
        .route("/version", get(handlers::version))
        .route("/v1/report/parse", post(handlers::parse))
        .route("/v1/report/render", post(handlers::render))
        .route("/v1/score", post(handlers::score))
        .route("/v1/check", post(handlers::check))
        .route("/v1/judge/prompt", post(handlers::judge_prompt))
        .route("/v1/judge/parse", post(handlers::judge_parse))
        .route("/v1/judge/run", post(handlers::judge_run))
        .route("/v1/feedback", post(handlers::feedback))
        .route("/v1/pairs", post(handlers::pairs))
        .route("/v1/pairs/loss", post(handlers::pairs_loss))
        .route("/v1/rerank", post(handlers::rerank_handler))
        .route("/v1/reward", post(handlers::reward))
        .route("/v1/evaluate", post(handlers::evaluate))
        .route("/v1/metaeval", post(handlers::metaeval))
        .route("/v1/significance", post(handlers::significance))
        .route("/v1/datagen/domains", post(handlers::datagen_domains))
        .route("/v1/datagen/topics", post(handlers::datagen_topics))
        .route("/v1/datagen/sentences", post(handlers::datagen_sentences))
        .route("/v1/datagen/inject", post(handlers::datagen_inject))
        .route("/v1/datagen/finetune", post(handlers::datagen_finetune))
        .with_state(state)
}

/// A running server plus the handle to stop it.
pub struct ServerHandle {
    pub addr: SocketAddr,
    shutdown: oneshot::Sender<()>,
    task: JoinHandle<()>,
}

impl ServerHandle {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub async fn stop(self) {
        let _ = self.shutdown.send(());
        let _ = self.task.await;
    }
}

/// Binds and serves in a background task; returns once the listener is
/// ready. Used by `serve --bind 127.0.0.1:0`-style embedding and by tests.
pub async fn spawn(config: ServerConfig) -> Result<ServerHandle, ServiceError> {
    config.validate()?;
    let gateway = Arc::new(Gateway::new(config.gateway.clone()).map_err(ServiceError::from)?);
    spawn_with_gateway(&config.bind, gateway).await
}

/// Like [`spawn`], with a caller-supplied transport (tests).
pub async fn spawn_with_transport(
    config: ServerConfig,
    transport: Arc<dyn Transport>,
) -> Result<ServerHandle, ServiceError> {
    config.validate()?;
    let gateway = Arc::new(
        Gateway::with_transport(config.gateway.clone(), transport).map_err(ServiceError::from)?,
    );
    spawn_with_gateway(&config.bind, gateway).await
}

async fn spawn_with_gateway(
    bind: &str,
    gateway: Arc<Gateway>,
) -> Result<ServerHandle, ServiceError> {
    let listener = TcpListener::bind(bind)
        .await
        .map_err(|e| ServiceError::Config(format!("cannot bind {bind}: {e}")))?;
    let addr = listener
        .local_addr()
        .map_err(|e| ServiceError::Internal(e.to_string()))?;
    let app = router(gateway);
    let (shutdown, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        let serve = axum::serve(listener, app).with_graceful_shutdown(async {
            let _ = rx.await;
        });
        if let Err(e) = serve.await {
            tracing::error!("server error: {e}");
        }
    });
    Ok(ServerHandle { addr, shutdown, task })
}

/// Serves on the configured address until the process is interrupted.
pub async fn run(config: ServerConfig) -> Result<(), ServiceError> {
    config.validate()?;
    let gateway = Arc::new(Gateway::new(config.gateway.clone()).map_err(ServiceError::from)?);
    let listener = TcpListener::bind(&config.bind)
        .await
        .map_err(|e| ServiceError::Config(format!("cannot bind {}: {e}", config.bind)))?;
    let addr = listener.local_addr().map_err(|e| ServiceError::Internal(e.to_string()))?;
    tracing::info!("listening on http://{addr}");
    println!("listening on http://{addr}");
    axum::serve(listener, router(gateway))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
