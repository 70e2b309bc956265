use std::time::Duration;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dddm::FieldError;
use serde_json::json;

#[derive(Debug)]
pub enum ApiError {
    Validation(Vec<FieldError>),
    NotFound(String),
    /// A request the body extractor refused, most often one over the size limit.
    Rejected {
        status: StatusCode,
        message: String,
    },
    Timeout(Duration),
    Internal(String),
}

impl ApiError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        ApiError::Validation(vec![FieldError::new(field, message)])
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Rejected { status, .. } => *status,
            ApiError::Timeout(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn errors(self) -> Vec<FieldError> {
        match self {
            ApiError::Validation(errors) => errors,
            ApiError::NotFound(id) => vec![FieldError::new(
                "dataset_id",
                format!("no dataset with id {id:?}"),
            )],
            ApiError::Rejected { message, .. } => vec![FieldError::new("body", message)],
            ApiError::Timeout(limit) => vec![FieldError::new(
                "request",
                format!("computation exceeded the {} ms limit", limit.as_millis()),
            )],
            ApiError::Internal(message) => vec![FieldError::new("server", message)],
        }
    }
}

impl From<dddm::Error> for ApiError {
    fn from(err: dddm::Error) -> Self {
        if err.is_validation() {
            ApiError::Validation(err.field_errors())
        } else {
            ApiError::Internal(err.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            log::error!("{status}: {self:?}");
        }
        (status, Json(json!({ "errors": self.errors() }))).into_response()
    }
}
