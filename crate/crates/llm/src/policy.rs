//! Household policy backed by a chat client: one decision chat per agent per
//! month, quarterly reflection chats, bounded per-agent memory, parse-retry
//! with fallback, and a dialogue log.

use std::sync::Arc;

use econ_core::error::{EconError, Result};
use econ_core::policies::{EconObservation, HouseholdPolicy, MonthContext, PolicyDecision};
use econ_core::records::DialogueRecord;
use econ_core::scalar::{real, Real};
use econ_core::types::{AgentState, TaxSchedule};

use crate::client::ChatClient;
use crate::error::LlmError;
use crate::memory::MemoryPool;
use crate::parse::parse_decision;
use crate::prompt::{build_decision_request, build_reflection_prompt};
use crate::types::{ChatContext, ChatMessage, ChatRequest, Dialogue, DialogueKind};

#[derive(Debug, Clone)]
pub struct LlmPolicySettings {
    pub model: String,
    pub temperature: f64,
    /// Re-asks after an unparseable completion before falling back.
    pub parse_retries: u32,
    /// Max concurrent decision chats.
    pub parallelism: usize,
    /// Memory window L.
    pub memory_window: usize,
}

impl Default for LlmPolicySettings {
    fn default() -> Self {
        LlmPolicySettings {
            model: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            parse_retries: 3,
            parallelism: 1,
            memory_window: 1,
        }
    }
}

pub struct LlmPolicy<T> {
    client: Arc<dyn ChatClient>,
    settings: LlmPolicySettings,
    schedule: TaxSchedule<T>,
    memories: Vec<MemoryPool>,
    previous: Vec<Option<PolicyDecision<T>>>,
    fallbacks: u32,
    dialogues: Vec<DialogueRecord>,
    memory_high_water: usize,
}

struct AgentChatOutcome<T> {
    decision: PolicyDecision<T>,
    /// Every exchange issued for this agent this month (retries included).
    transcript: Vec<(String, String)>,
    fell_back: bool,
}

impl<T: Real> LlmPolicy<T> {
    pub fn new(
        client: Arc<dyn ChatClient>,
        settings: LlmPolicySettings,
        schedule: TaxSchedule<T>,
        num_agents: usize,
    ) -> Self {
        let memories = (0..num_agents).map(|_| MemoryPool::new(settings.memory_window)).collect();
        LlmPolicy {
            client,
            settings,
            schedule,
            memories,
            previous: vec![None; num_agents],
            fallbacks: 0,
            dialogues: Vec::new(),
            memory_high_water: 0,
        }
    }

    /// First-month fallback when a decision never parses.
    fn default_decision() -> PolicyDecision<T> {
        PolicyDecision { work_propensity: real(0.5), consumption_propensity: real(0.5) }
    }

    fn chat_for_decision(
        client: &dyn ChatClient,
        ctx: ChatContext,
        prompt: &str,
        request: &ChatRequest,
        parse_retries: u32,
        fallback: PolicyDecision<T>,
    ) -> std::result::Result<AgentChatOutcome<T>, LlmError> {
        let mut transcript = Vec::new();
        for _attempt in 0..=parse_retries {
            let response = client.chat(&ctx, request)?;
            transcript.push((prompt.to_string(), response.content.clone()));
            match parse_decision::<T>(&response.content) {
                Ok(decision) => {
                    return Ok(AgentChatOutcome { decision, transcript, fell_back: false })
                }
                Err(error) => {
                    log::warn!("agent {} month {}: {error}", ctx.agent_id, ctx.month_index);
                }
            }
        }
        Ok(AgentChatOutcome { decision: fallback, transcript, fell_back: true })
    }
}

impl<T: Real> HouseholdPolicy<T> for LlmPolicy<T> {
    fn name(&self) -> &'static str {
        "llm"
    }

    fn decide(
        &mut self,
        ctx: &MonthContext<T>,
        agents: &[AgentState<T>],
        obs: &[EconObservation<T>],
    ) -> Result<Vec<PolicyDecision<T>>> {
        let n = agents.len();
        if self.memories.len() != n {
            return Err(EconError::Policy(format!(
                "policy initialized for {} agents, got {n}",
                self.memories.len()
            )));
        }
        let mut prompts = Vec::with_capacity(n);
        let mut requests = Vec::with_capacity(n);
        for i in 0..n {
            let (prompt, request) = build_decision_request(
                &agents[i],
                ctx,
                &obs[i],
                &self.schedule,
                &self.memories[i],
                &self.settings.model,
                self.settings.temperature,
            )
            .map_err(|e| EconError::Policy(e.to_string()))?;
            prompts.push(prompt);
            requests.push(request);
        }

        let fallbacks: Vec<PolicyDecision<T>> =
            self.previous.iter().map(|p| p.unwrap_or_else(Self::default_decision)).collect();
        let parse_retries = self.settings.parse_retries;
        let client = Arc::clone(&self.client);
        let month_index = ctx.month_index;

        let run_agent = |i: usize| {
            let chat_ctx =
                ChatContext { agent_id: i, month_index, kind: DialogueKind::Decision };
            Self::chat_for_decision(
                client.as_ref(),
                chat_ctx,
                &prompts[i],
                &requests[i],
                parse_retries,
                fallbacks[i],
            )
        };

        let outcomes: Vec<std::result::Result<AgentChatOutcome<T>, LlmError>> =
            if self.settings.parallelism <= 1 {
                (0..n).map(run_agent).collect()
            } else {
                let mut collected: Vec<Option<_>> = (0..n).map(|_| None).collect();
                for chunk in (0..n).collect::<Vec<_>>().chunks(self.settings.parallelism) {
                    std::thread::scope(|scope| {
                        let handles: Vec<_> = chunk
                            .iter()
                            .map(|&i| (i, scope.spawn(move || run_agent(i))))
                            .collect();
                        for (i, handle) in handles {
                            collected[i] = Some(handle.join().expect("chat thread panicked"));
                        }
                    });
                }
                collected.into_iter().map(|o| o.expect("all agents processed")).collect()
            };

        let mut decisions = Vec::with_capacity(n);
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let outcome = outcome.map_err(|e| EconError::Policy(e.to_string()))?;
            for (prompt, response) in &outcome.transcript {
                self.dialogues.push(DialogueRecord {
                    agent_id: i,
                    month_index,
                    kind: DialogueKind::Decision.as_str().to_string(),
                    prompt: prompt.clone(),
                    response: response.clone(),
                });
            }
            if let Some((prompt, response)) = outcome.transcript.last() {
                self.memories[i].push(Dialogue::new(
                    month_index,
                    DialogueKind::Decision,
                    prompt.clone(),
                    response.clone(),
                ));
            }
            if outcome.fell_back {
                self.fallbacks += 1;
            }
            self.previous[i] = Some(outcome.decision);
            decisions.push(outcome.decision);
        }
        self.note_memory_high_water();
        Ok(decisions)
    }

    fn on_quarter_end(&mut self, ctx: &MonthContext<T>, agents: &[AgentState<T>]) -> Result<()> {
        for i in 0..agents.len() {
            let quarter = self.memories[i].take_quarter();
            let prompt = build_reflection_prompt(&quarter)
                .map_err(|e| EconError::Policy(e.to_string()))?;
            let request = ChatRequest {
                model: self.settings.model.clone(),
                messages: vec![ChatMessage::user(prompt.clone())],
                temperature: self.settings.temperature,
            };
            let chat_ctx = ChatContext {
                agent_id: i,
                month_index: ctx.month_index,
                kind: DialogueKind::Reflection,
            };
            let response = self
                .client
                .chat(&chat_ctx, &request)
                .map_err(|e| EconError::Policy(e.to_string()))?;
            self.memories[i].push(Dialogue::new(
                ctx.month_index,
                DialogueKind::Reflection,
                prompt.clone(),
                response.content.clone(),
            ));
            self.dialogues.push(DialogueRecord {
                agent_id: i,
                month_index: ctx.month_index,
                kind: DialogueKind::Reflection.as_str().to_string(),
                prompt,
                response: response.content,
            });
        }
        self.note_memory_high_water();
        Ok(())
    }

    fn memory_high_water(&self) -> Option<(usize, usize)> {
        Some((self.memory_high_water, self.capacity_units()))
    }

    fn take_fallbacks(&mut self) -> u32 {
        std::mem::take(&mut self.fallbacks)
    }

    fn drain_dialogues(&mut self) -> Vec<DialogueRecord> {
        std::mem::take(&mut self.dialogues)
    }
}

impl<T: Real> LlmPolicy<T> {
    /// Largest memory window currently held by any agent, in accounting
    /// units; test hook for the 2L+1 bound.
    pub fn max_window_units(&self) -> usize {
        self.memories.iter().map(MemoryPool::units).max().unwrap_or(0)
    }

    fn note_memory_high_water(&mut self) {
        self.memory_high_water = self.memory_high_water.max(self.max_window_units());
    }

    pub fn capacity_units(&self) -> usize {
        2 * self.settings.memory_window + 1
    }
}
