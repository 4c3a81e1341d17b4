use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no trial with id '{id}'"))
    }

    pub fn storage(err: std::io::Error) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", err.to_string())
    }
}

impl From<seqprt::Error> for ApiError {
    fn from(err: seqprt::Error) -> Self {
        use seqprt::Error as E;
        let (status, code) = match &err {
            E::InvalidSpec(_) => (StatusCode::BAD_REQUEST, "invalid_spec"),
            E::Domain(_) | E::Malformed { .. } => (StatusCode::BAD_REQUEST, "invalid_observation"),
            E::Usage(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            E::Infeasible(_) => (StatusCode::UNPROCESSABLE_ENTITY, "infeasible"),
            E::DegenerateSample(_) => (StatusCode::UNPROCESSABLE_ENTITY, "degenerate_sample"),
        };
        ApiError::new(status, code, err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = Body {
            code: self.code,
            message: &self.message,
        };
        (status, Json(body)).into_response()
    }
}
