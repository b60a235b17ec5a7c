//! LLM-driven household agents: perception prompts rendered from the
//! economic state, a bounded 2L+1 conversation memory with quarterly
//! reflection, decision parsing with grid snapping, and chat-completion
//! clients (live OpenAI-compatible HTTP plus deterministic mocks).

pub mod client;
pub mod error;
pub mod memory;
pub mod parse;
pub mod policy;
pub mod prompt;
pub mod types;

pub use client::{
    ChatClient, EconRationalClient, EconRationalConfig, HttpChatClient, HttpClientConfig,
    ScriptRecord, ScriptedChatClient,
};
pub use error::LlmError;
pub use memory::MemoryPool;
pub use parse::{parse_decision, snap_to_grid};
pub use policy::{LlmPolicy, LlmPolicySettings};
pub use prompt::{
    build_decision_request, build_reflection_prompt, render_decision_prompt, PromptFixture,
    REFLECTION_QUESTION,
};
pub use types::{ChatContext, ChatMessage, ChatRequest, ChatResponse, ChatRole, Dialogue, DialogueKind};
