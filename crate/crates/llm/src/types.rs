use serde::{Deserialize, Serialize};

use crate::error::{LlmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::Assistant, content: content.into() }
    }
}

/// One chat-completion request in the OpenAI-compatible shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(LlmError::Domain("chat request has no messages".into()));
        }
        if self.messages[0].role == ChatRole::Assistant {
            return Err(LlmError::Domain("first chat message must be system or user".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
}

/// Who and when a chat is for; mock clients key their behavior off this,
/// the live client ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChatContext {
    pub agent_id: usize,
    pub month_index: usize,
    pub kind: DialogueKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DialogueKind {
    Decision,
    Reflection,
}

impl DialogueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DialogueKind::Decision => "decision",
            DialogueKind::Reflection => "reflection",
        }
    }
}

/// One stored prompt/response exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub month_index: usize,
    pub prompt_text: String,
    pub response_text: String,
    pub kind: DialogueKind,
}

impl Dialogue {
    pub fn new(month_index: usize, kind: DialogueKind, prompt: String, response: String) -> Self {
        debug_assert!(!prompt.is_empty());
        Dialogue { month_index, prompt_text: prompt, response_text: response, kind }
    }
}
