//! Session archives: a run result plus optional chat state as one JSON
//! document. Archives never hold dataset rows or API keys.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::explain::{ChatSession, Message};
use crate::result::RunResult;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("unsupported archive format version {0:?} (expected \"1\")")]
    UnsupportedVersion(Option<String>),
    #[error("corrupt archive: {0}")]
    Corrupt(String),
}

/// Chat state stored alongside a result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatState {
    pub word_limit: usize,
    pub model_id: String,
    pub keywords: Vec<String>,
    pub messages: Vec<Message>,
}

impl ChatState {
    pub fn from_session(session: &ChatSession) -> Self {
        Self {
            word_limit: session.word_limit,
            model_id: session.model_id.clone(),
            keywords: session.keywords.clone(),
            messages: session.messages.clone(),
        }
    }

    pub fn into_session(self, run_ref: impl Into<String>) -> ChatSession {
        ChatSession {
            run_ref: run_ref.into(),
            messages: self.messages,
            word_limit: self.word_limit,
            model_id: self.model_id,
            keywords: self.keywords,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionArchive {
    pub format_version: String,
    pub result: RunResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chat: Option<ChatState>,
}

impl SessionArchive {
    pub fn new(result: RunResult, chat: Option<ChatState>) -> Self {
        Self {
            format_version: FORMAT_VERSION.to_string(),
            result,
            chat,
        }
    }

    /// Pretty-printed JSON; stable for identical contents.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("archive serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ArchiveError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ArchiveError::Corrupt(e.to_string()))?;
        match value.get("format_version").and_then(Value::as_str) {
            Some(FORMAT_VERSION) => {}
            other => return Err(ArchiveError::UnsupportedVersion(other.map(str::to_string))),
        }
        let archive: Self =
            serde_json::from_value(value).map_err(|e| ArchiveError::Corrupt(e.to_string()))?;
        if let Some(chat) = &archive.chat {
            chat.clone()
                .into_session("")
                .validate()
                .map_err(|e| ArchiveError::Corrupt(e.to_string()))?;
        }
        if archive.result.embedding.rows() != archive.result.embedding_labels.len() {
            return Err(ArchiveError::Corrupt("embedding and label counts differ".into()));
        }
        Ok(archive)
    }
}
