//! Bounded per-agent conversation memory.
//!
//! The window holds the decision dialogues of the previous `L` months plus
//! the latest quarterly reflection: 2L+1 accounting units, counting each
//! decision dialogue as a prompt/response pair and the reflection as one
//! message. A new reflection replaces the previous one.

use std::collections::VecDeque;

use crate::types::{ChatMessage, Dialogue, DialogueKind};

#[derive(Debug, Clone)]
pub struct MemoryPool {
    window_months: usize,
    decisions: VecDeque<Dialogue>,
    reflection: Option<Dialogue>,
    /// Decision dialogues of the quarter in progress, drained at quarter end
    /// to build the reflection prompt. Not part of the window accounting.
    quarter: Vec<Dialogue>,
}

impl MemoryPool {
    pub fn new(window_months: usize) -> Self {
        MemoryPool {
            window_months,
            decisions: VecDeque::new(),
            reflection: None,
            quarter: Vec::new(),
        }
    }

    /// Store a dialogue: decisions evict the oldest beyond L months,
    /// reflections replace the previous reflection.
    pub fn push(&mut self, dialogue: Dialogue) {
        match dialogue.kind {
            DialogueKind::Decision => {
                self.quarter.push(dialogue.clone());
                self.decisions.push_back(dialogue);
                while self.decisions.len() > self.window_months {
                    self.decisions.pop_front();
                }
            }
            DialogueKind::Reflection => {
                self.reflection = Some(dialogue);
            }
        }
    }

    /// Drain the quarter buffer (the last three decision dialogues).
    pub fn take_quarter(&mut self) -> Vec<Dialogue> {
        std::mem::take(&mut self.quarter)
    }

    pub fn quarter_len(&self) -> usize {
        self.quarter.len()
    }

    /// Accounting units currently held: 2 per decision dialogue plus 1 for
    /// the reflection.
    pub fn units(&self) -> usize {
        2 * self.decisions.len() + usize::from(self.reflection.is_some())
    }

    /// Maximum accounting units: 2L+1.
    pub fn capacity_units(&self) -> usize {
        2 * self.window_months + 1
    }

    pub fn decision_dialogues(&self) -> impl Iterator<Item = &Dialogue> {
        self.decisions.iter()
    }

    pub fn reflection(&self) -> Option<&Dialogue> {
        self.reflection.as_ref()
    }

    /// The window rendered as prior conversation turns: the latest reflection
    /// (verbatim, as standing system context) followed by the retained
    /// decision dialogues as user/assistant pairs, oldest first.
    pub fn window_messages(&self) -> Vec<ChatMessage> {
        let mut messages = Vec::with_capacity(self.units());
        if let Some(reflection) = &self.reflection {
            messages.push(ChatMessage::system(reflection.response_text.clone()));
        }
        for dialogue in &self.decisions {
            messages.push(ChatMessage::user(dialogue.prompt_text.clone()));
            messages.push(ChatMessage::assistant(dialogue.response_text.clone()));
        }
        messages
    }
}
