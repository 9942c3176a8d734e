//! Conversational sessions with memory over a finished run.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::keywords::{default_keywords, detect_keywords};
use super::prompt::PromptTemplate;
use super::rag::{query_store, VectorStore, DEFAULT_TOP_K};
use crate::llm::{ChatMessage, ChatProvider, LlmError};
use crate::result::RunResult;

pub const INITIAL_QUESTION: &str = "Provide an exciting summary of the results";
pub const DEFAULT_WORD_LIMIT: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Human,
    Ai,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatSession {
    pub run_ref: String,
    pub messages: Vec<Message>,
    pub word_limit: usize,
    pub model_id: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ChatError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("the session has not been started; request the initial summary first")]
    NotStarted,
    #[error("the session has already been started")]
    AlreadyStarted,
    #[error("question is empty")]
    EmptyQuestion,
    #[error("invalid session: {0}")]
    Invalid(String),
}

/// What one exchange produced, for display and auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub question: String,
    pub answer: String,
    pub prompt: String,
    pub matched_keywords: Vec<String>,
    pub retrieved: Vec<String>,
}

impl ChatSession {
    pub fn new(run_ref: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            run_ref: run_ref.into(),
            messages: Vec::new(),
            word_limit: DEFAULT_WORD_LIMIT,
            model_id: model_id.into(),
            keywords: default_keywords(),
        }
    }

    pub fn is_started(&self) -> bool {
        !self.messages.is_empty()
    }

    /// Roles alternate human/ai starting with the initial question, and the
    /// word limit is positive.
    pub fn validate(&self) -> Result<(), ChatError> {
        if self.word_limit == 0 {
            return Err(ChatError::Invalid("word limit must be at least 1".into()));
        }
        if !self.messages.len().is_multiple_of(2) {
            return Err(ChatError::Invalid("unanswered question in history".into()));
        }
        for (i, m) in self.messages.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::Human } else { Role::Ai };
            if m.role != expected {
                return Err(ChatError::Invalid(format!("message {i} has the wrong role")));
            }
        }
        if let Some(first) = self.messages.first() {
            if first.text != INITIAL_QUESTION {
                return Err(ChatError::Invalid("history does not begin with the initial question".into()));
            }
        }
        Ok(())
    }
}

/// Prompt template, background store and retrieval depth used for chats.
#[derive(Debug, Clone)]
pub struct Explainer {
    pub template: PromptTemplate,
    pub store: VectorStore,
    pub top_k: usize,
}

impl Default for Explainer {
    fn default() -> Self {
        Self {
            template: PromptTemplate::default(),
            store: VectorStore::bundled(),
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl Explainer {
    pub fn new(template: PromptTemplate, store: VectorStore, top_k: usize) -> Self {
        Self {
            template,
            store,
            top_k,
        }
    }

    /// Asks the initial summary question on a fresh session.
    pub fn begin(
        &self,
        session: &mut ChatSession,
        result: &RunResult,
        llm: &dyn ChatProvider,
    ) -> Result<Turn, ChatError> {
        if session.is_started() {
            return Err(ChatError::AlreadyStarted);
        }
        self.exchange(session, INITIAL_QUESTION, result, llm)
    }

    /// Asks a follow-up question. On failure the session is left untouched.
    pub fn ask(
        &self,
        session: &mut ChatSession,
        question: &str,
        result: &RunResult,
        llm: &dyn ChatProvider,
    ) -> Result<Turn, ChatError> {
        if !session.is_started() {
            return Err(ChatError::NotStarted);
        }
        self.exchange(session, question, result, llm)
    }

    /// The retrieval a question would trigger: matched keywords and, when
    /// any matched and the store is stocked, the retrieved chunk texts.
    pub fn retrieve(&self, session: &ChatSession, question: &str) -> (Vec<String>, Vec<String>) {
        let matched = detect_keywords(question, &session.keywords);
        let retrieved = if matched.is_empty() || self.store.is_empty() {
            Vec::new()
        } else {
            query_store(&self.store, question, self.top_k)
        };
        (matched, retrieved)
    }

    fn exchange(
        &self,
        session: &mut ChatSession,
        question: &str,
        result: &RunResult,
        llm: &dyn ChatProvider,
    ) -> Result<Turn, ChatError> {
        let question = question.trim();
        if question.is_empty() {
            return Err(ChatError::EmptyQuestion);
        }
        let (matched_keywords, retrieved) = self.retrieve(session, question);
        let prompt = self.template.build(result, session, &retrieved);
        let asked_at = Utc::now();
        let answer = llm.complete(&[ChatMessage::system(prompt.clone()), ChatMessage::user(question)])?;
        session.messages.push(Message {
            role: Role::Human,
            text: question.to_string(),
            timestamp: asked_at,
        });
        session.messages.push(Message {
            role: Role::Ai,
            text: answer.clone(),
            timestamp: Utc::now(),
        });
        Ok(Turn {
            question: question.to_string(),
            answer,
            prompt,
            matched_keywords,
            retrieved,
        })
    }
}

/// Starts `session` with the initial summary question.
pub fn begin_session(
    session: &mut ChatSession,
    store: &VectorStore,
    result: &RunResult,
    llm: &dyn ChatProvider,
) -> Result<String, ChatError> {
    let explainer = Explainer::new(PromptTemplate::default(), store.clone(), DEFAULT_TOP_K);
    explainer.begin(session, result, llm).map(|t| t.answer)
}

/// One follow-up exchange with the bundled template and default top-k.
pub fn advance_session(
    session: &mut ChatSession,
    question: &str,
    store: &VectorStore,
    result: &RunResult,
    llm: &dyn ChatProvider,
) -> Result<String, ChatError> {
    let explainer = Explainer::new(PromptTemplate::default(), store.clone(), DEFAULT_TOP_K);
    explainer.ask(session, question, result, llm).map(|t| t.answer)
}
