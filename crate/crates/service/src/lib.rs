//! HTTP front end for pronunciation scoring.
//!
//! * `POST /v1/score` scores one attempt. The body names the target text, exactly
//!   one logits source, and optional calibration overrides that apply to that
//!   request only.
//! * `GET /v1/phrases` lists the practice phrases.
//! * `GET /v1/health` reports liveness and the backend kind.

mod backend;
mod error;
mod phrases;
mod routes;

pub use backend::{fetch_remote_logits, Backend};
pub use error::ServiceError;
pub use phrases::{default_phrases, load_phrases, parse_phrases, Phrase};
pub use routes::{router, ConfigOverrides, ScoreRequest};

use std::net::SocketAddr;
use std::sync::Arc;

use pronscore::{CalibrationConfig, Vocabulary};

/// Immutable after startup; shared by every request.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub defaults: CalibrationConfig,
    pub vocab: Vocabulary,
    pub backend: Backend,
    pub phrases: Vec<Phrase>,
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        self.defaults
            .validate()
            .map_err(|e| ServiceError::Config(e.to_string()))?;
        self.backend.validate()?;
        phrases::check_unique(&self.phrases)
    }
}

pub fn app(config: ServiceConfig) -> Result<axum::Router, ServiceError> {
    config.validate()?;
    Ok(router(Arc::new(config)))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<(), ServiceError> {
    let app = app(config)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::Config(format!("cannot bind {addr}: {e}")))?;
    tracing::info!(
        "listening on {}",
        listener
            .local_addr()
            .map_err(|e| ServiceError::Config(e.to_string()))?
    );
    axum::serve(listener, app)
        .await
        .map_err(|e| ServiceError::Config(e.to_string()))
}
