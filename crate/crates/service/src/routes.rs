use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::{Deserialize, Deserializer};

use pronscore::ctcl::CtclContainer;
use pronscore::{score_transcript, CalibrationConfig, LogitMatrix, PartialBand, ScoredTranscript};

use crate::backend::{fetch_remote_logits, Backend};
use crate::phrases::Phrase;
use crate::{ServiceConfig, ServiceError};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(rename = "T", default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub theta: Option<f64>,
    /// Absent: keep the default band. `null`: no band.
    #[serde(default, deserialize_with = "present")]
    pub partial: Option<Option<PartialBand>>,
}

fn present<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Option<PartialBand>>, D::Error> {
    Option::<PartialBand>::deserialize(d).map(Some)
}

impl ConfigOverrides {
    pub fn apply(&self, base: &CalibrationConfig) -> Result<CalibrationConfig, ServiceError> {
        let cfg = CalibrationConfig {
            temperature: self.temperature.unwrap_or(base.temperature),
            k: self.k.unwrap_or(base.k),
            theta: self.theta.unwrap_or(base.theta),
            partial: self.partial.unwrap_or(base.partial),
        };
        cfg.validate()
            .map_err(|e| ServiceError::BadRequest(format!("overrides: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    #[serde(alias = "target_text")]
    pub target: String,
    /// Base64 CTCL container.
    #[serde(default)]
    pub logits_inline: Option<String>,
    #[serde(default)]
    pub logits_id: Option<String>,
    /// Base64 audio, passed through to the remote backend.
    #[serde(default)]
    pub audio: Option<String>,
    #[serde(default)]
    pub overrides: ConfigOverrides,
}

pub fn router(state: Arc<ServiceConfig>) -> Router {
    Router::new()
        .route("/v1/score", post(score))
        .route("/v1/phrases", get(phrases))
        .route("/v1/health", get(health))
        .with_state(state)
}

async fn health(State(cfg): State<Arc<ServiceConfig>>) -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok", "backend": cfg.backend.kind()}))
}

async fn phrases(State(cfg): State<Arc<ServiceConfig>>) -> Json<Vec<Phrase>> {
    Json(cfg.phrases.clone())
}

async fn score(
    State(cfg): State<Arc<ServiceConfig>>,
    body: Bytes,
) -> Result<Json<ScoredTranscript>, ServiceError> {
    let req: ScoreRequest = serde_json::from_slice(&body)
        .map_err(|e| ServiceError::BadRequest(format!("request body: {e}")))?;
    handle_score(&cfg, req).await.map(Json)
}

fn decode_b64(field: &str, data: &str) -> Result<Vec<u8>, ServiceError> {
    base64::engine::general_purpose::STANDARD
        .decode(data)
        .map_err(|e| ServiceError::BadRequest(format!("{field} is not valid base64: {e}")))
}

fn check_vocab(cfg: &ServiceConfig, container: CtclContainer) -> Result<LogitMatrix, ServiceError> {
    if container.vocab != cfg.vocab {
        return Err(ServiceError::BadTarget(
            pronscore::Error::InvalidVocabulary(
                "logits vocabulary differs from the service vocabulary".into(),
            ),
        ));
    }
    Ok(container.logits)
}

pub(crate) async fn handle_score(
    cfg: &ServiceConfig,
    req: ScoreRequest,
) -> Result<ScoredTranscript, ServiceError> {
    let config = req.overrides.apply(&cfg.defaults)?;
    let logits = match (req.logits_inline, req.logits_id, req.audio) {
        (Some(inline), None, None) => {
            let bytes = decode_b64("logits_inline", &inline)?;
            let container = CtclContainer::from_bytes(&bytes)
                .map_err(|e| ServiceError::BadRequest(format!("logits_inline: {e}")))?;
            check_vocab(cfg, container)?
        }
        (None, Some(id), None) => check_vocab(cfg, cfg.backend.load_file(&id)?)?,
        (None, None, Some(audio)) => {
            let Backend::Remote { url, timeout } = &cfg.backend else {
                return Err(ServiceError::BadRequest(
                    "audio input requires the remote backend".into(),
                ));
            };
            let audio = decode_b64("audio", &audio)?;
            fetch_remote_logits(audio, url, *timeout, &cfg.vocab).await?
        }
        _ => {
            return Err(ServiceError::BadRequest(
                "exactly one of logits_inline, logits_id, audio is required".into(),
            ))
        }
    };
    Ok(score_transcript(&logits, &req.target, &cfg.vocab, &config)?)
}
