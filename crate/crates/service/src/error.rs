use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use gp4nldr_core::explain::ChatError;
use gp4nldr_core::llm::LlmError;

/// JSON error body: `{code, message, field?}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.to_string(),
            message: message.into(),
            field: None,
        }
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} `{id}`"))
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn with_field(mut self, field: &str) -> Self {
        self.field = Some(field.to_string());
        self
    }
}

impl From<LlmError> for ApiError {
    fn from(e: LlmError) -> Self {
        let status = match e {
            LlmError::AuthFailure(_) => StatusCode::UNAUTHORIZED,
            LlmError::MissingApiKey | LlmError::EmptyRequest => StatusCode::BAD_REQUEST,
            LlmError::RateLimited => StatusCode::TOO_MANY_REQUESTS,
            LlmError::Timeout => StatusCode::GATEWAY_TIMEOUT,
            _ => StatusCode::BAD_GATEWAY,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<ChatError> for ApiError {
    fn from(e: ChatError) -> Self {
        match e {
            ChatError::Llm(l) => l.into(),
            ChatError::NotStarted | ChatError::AlreadyStarted => {
                Self::new(StatusCode::CONFLICT, "session_state", e.to_string())
            }
            ChatError::EmptyQuestion => {
                Self::bad_request("invalid_question", e.to_string()).with_field("question")
            }
            ChatError::Invalid(m) => Self::bad_request("invalid_session", m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
