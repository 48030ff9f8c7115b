//! Error mapping onto HTTP statuses and the machine-readable envelope.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;
use xeval_api::{ApiError, ErrorBody};
use xeval_gateway::GatewayError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Config(String),
    #[error("cassette miss: {0}")]
    CassetteMiss(String),
    #[error("endpoint failure: {0}")]
    Endpoint(String),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Validation(_) => "validation",
            ServiceError::Config(_) => "config",
            ServiceError::CassetteMiss(_) => "cassette_miss",
            ServiceError::Endpoint(_) => "endpoint",
            ServiceError::Internal(_) => "internal",
        }
    }

    fn status(&self) -> StatusCode {
        match self {
            ServiceError::Validation(_) => StatusCode::BAD_REQUEST,
            ServiceError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::CassetteMiss(_) | ServiceError::Endpoint(_) => StatusCode::BAD_GATEWAY,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ApiError { code: self.code().to_string(), message: self.to_string() },
        };
        (self.status(), Json(body)).into_response()
    }
}

impl From<GatewayError> for ServiceError {
    fn from(err: GatewayError) -> Self {
        match err {
            GatewayError::InvalidRequest(m) => ServiceError::Validation(m),
            GatewayError::MissingEndpoint { .. } | GatewayError::MissingCassette { .. } => {
                ServiceError::Config(err.to_string())
            }
            GatewayError::CassetteMiss { fingerprint } => ServiceError::CassetteMiss(fingerprint),
            GatewayError::RateLimited { .. } | GatewayError::Endpoint { .. } => {
                ServiceError::Endpoint(err.to_string())
            }
            GatewayError::Cassette { .. } => ServiceError::Config(err.to_string()),
        }
    }
}

/// Core-layer failures are caller-data problems.
macro_rules! validation_from {
    ($($ty:ty),+ $(,)?) => {
        $(impl From<$ty> for ServiceError {
            fn from(err: $ty) -> Self {
                ServiceError::Validation(err.to_string())
            }
        })+
    };
}

validation_from!(
    xeval_core::report::ParseError,
    xeval_core::report::InvariantViolation,
    xeval_core::judge::JudgeError,
    xeval_core::feedback::FeedbackError,
    xeval_core::ranking::RankingError,
    xeval_core::metaeval::MetaEvalError,
    xeval_core::metaeval::StatError,
    xeval_core::datagen::DatagenError,
);
