//! Error responses: a status code and a JSON body with a machine-readable
//! `error` code.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value as Json_};
use zsheet::access::AccessError;
use zsheet::recalc::CommitError;
use zsheet::store::StoreError;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Json_,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, reason: impl ToString) -> ApiError {
        ApiError { status, body: json!({ "error": code, "reason": reason.to_string() }) }
    }

    pub fn bad_request(reason: impl ToString) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", reason)
    }

    pub fn unauthorized(reason: impl ToString) -> ApiError {
        ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", reason)
    }

    pub fn not_found(reason: impl ToString) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", reason)
    }

    pub fn internal(reason: impl ToString) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", reason)
    }

    fn with(mut self, key: &str, v: Json_) -> ApiError {
        self.body[key] = v;
        self
    }
}

impl From<CommitError> for ApiError {
    fn from(e: CommitError) -> ApiError {
        let reason = e.to_string();
        match e {
            CommitError::Parse { path, addr, error } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "parse_error", &reason)
                    .with("path", json!(path))
                    .with("cell", json!(addr))
                    .with("position", json!(error.position))
                    .with("message", json!(error.message))
            }
            CommitError::Store(StoreError::PageNotFound(_) | StoreError::TemplateNotFound(_)) => {
                ApiError::not_found(reason)
            }
            CommitError::Store(StoreError::PageExists(_)) => ApiError::new(StatusCode::CONFLICT, "exists", reason),
            CommitError::Spec(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "spec_error", reason),
            CommitError::Bounds(_) => ApiError::new(StatusCode::BAD_REQUEST, "out_of_bounds", reason),
            CommitError::Invalid(_) => ApiError::bad_request(reason),
            CommitError::Io(_) | CommitError::Poisoned => ApiError::internal(reason),
        }
    }
}

impl From<AccessError> for ApiError {
    fn from(e: AccessError) -> ApiError {
        let reason = e.to_string();
        match e {
            AccessError::Denied { user, path, view } => ApiError::new(StatusCode::FORBIDDEN, "forbidden", reason)
                .with("user", json!(user))
                .with("path", json!(path))
                .with("view", json!(view)),
            AccessError::AdminOnly { user } => {
                ApiError::new(StatusCode::FORBIDDEN, "admin_only", reason).with("user", json!(user))
            }
            AccessError::NotFound(path) => ApiError::not_found(reason).with("path", json!(path)),
            AccessError::Rejected { cells, .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "rejected", reason).with("cells", json!(cells))
            }
            AccessError::Bounds(_) => ApiError::new(StatusCode::BAD_REQUEST, "out_of_bounds", reason),
            AccessError::Commit(c) => c.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
