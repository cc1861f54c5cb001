use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("cannot score target: {0}")]
    BadTarget(#[from] pronscore::Error),
    #[error("acoustic backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend vocabulary mismatch: {0}")]
    VocabMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::NotFound(_) => "NotFound",
            ServiceError::BadTarget(_) => "BadTarget",
            ServiceError::BackendUnavailable(_) => "BackendUnavailable",
            ServiceError::VocabMismatch(_) => "VocabMismatch",
            ServiceError::Config(_) => "ConfigError",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadTarget(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::BackendUnavailable(_) | ServiceError::VocabMismatch(_) => {
                StatusCode::BAD_GATEWAY
            }
            ServiceError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({"error": self.kind(), "message": self.to_string()});
        (self.status(), Json(body)).into_response()
    }
}
