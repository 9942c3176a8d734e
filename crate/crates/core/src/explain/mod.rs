//! Explaining runs through a language model: prompt assembly, keyword-gated
//! retrieval of background text, and chat sessions with memory.

pub mod keywords;
pub mod prompt;
pub mod rag;
pub mod session;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use keywords::{default_keywords, detect_keywords, DEFAULT_KEYWORDS};
pub use prompt::{build_prompt, PromptTemplate, TemplateError, MAX_LISTED_FEATURES};
pub use rag::{chunk_documents, query_store, vectorize, VectorStore};
pub use session::{
    advance_session, begin_session, ChatError, ChatSession, Explainer, Message, Role, Turn,
    DEFAULT_WORD_LIMIT, INITIAL_QUESTION,
};

/// Retrieval settings, loadable from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub keywords: Vec<String>,
    pub chunk_chars: usize,
    pub overlap_chars: usize,
    pub top_k: usize,
    pub word_limit: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            keywords: default_keywords(),
            chunk_chars: rag::DEFAULT_CHUNK_CHARS,
            overlap_chars: rag::DEFAULT_OVERLAP_CHARS,
            top_k: rag::DEFAULT_TOP_K,
            word_limit: DEFAULT_WORD_LIMIT,
        }
    }
}

impl ExplainConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        Self::from_toml(&text).map_err(|e| e.to_string())
    }
}
