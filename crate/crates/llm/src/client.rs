//! Chat-completion clients: a live OpenAI-compatible HTTP client and two
//! deterministic mocks (scripted per agent/month, and an embedded
//! econ-rational rule that reacts to its own prompts).

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{LlmError, Result};
use crate::parse::snap_to_grid;
use crate::types::{ChatContext, ChatRequest, ChatResponse, ChatRole, DialogueKind};

/// A synchronous chat-completion backend. Implementations must be safe to
/// share across the decision fan-out threads.
pub trait ChatClient: Send + Sync {
    fn chat(&self, ctx: &ChatContext, request: &ChatRequest) -> Result<ChatResponse>;
}

/// Configuration for the live HTTP client.
#[derive(Debug, Clone)]
pub struct HttpClientConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Retries after transport errors or rate-limit/server statuses.
    pub retries: u32,
    pub backoff: Duration,
}

/// Live client speaking the OpenAI-compatible chat-completions wire format:
/// POST {base_url}/chat/completions with `model`, `messages[{role,content}]`,
/// `temperature`; the reply is read from `choices[0].message.content`.
pub struct HttpChatClient {
    config: HttpClientConfig,
    http: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: String,
}

enum Attempt {
    Retryable(String),
    Fatal(LlmError),
}

impl HttpChatClient {
    pub fn new(config: HttpClientConfig) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(HttpChatClient { config, http })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn try_once(&self, url: &str, request: &ChatRequest) -> std::result::Result<String, Attempt> {
        let wire = WireRequest {
            model: &request.model,
            messages: request
                .messages
                .iter()
                .map(|m| WireMessage {
                    role: match m.role {
                        ChatRole::System => "system",
                        ChatRole::User => "user",
                        ChatRole::Assistant => "assistant",
                    },
                    content: &m.content,
                })
                .collect(),
            temperature: request.temperature,
        };
        let mut builder = self.http.post(url).json(&wire);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| Attempt::Retryable(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Attempt::Retryable(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(LlmError::Protocol(format!("status {status}"))));
        }
        let body: WireResponse = response
            .json()
            .map_err(|e| Attempt::Fatal(LlmError::Protocol(format!("malformed body: {e}"))))?;
        let choice = body
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Attempt::Fatal(LlmError::Protocol("response has no choices".into())))?;
        Ok(choice.message.content)
    }
}

impl ChatClient for HttpChatClient {
    fn chat(&self, _ctx: &ChatContext, request: &ChatRequest) -> Result<ChatResponse> {
        request.validate()?;
        let url = self.endpoint();
        let mut last_error = String::new();
        for attempt in 0..=self.config.retries {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff * attempt);
            }
            match self.try_once(&url, request) {
                Ok(content) => return Ok(ChatResponse { content }),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retryable(message)) => {
                    log::warn!("chat attempt {} failed: {message}", attempt + 1);
                    last_error = message;
                }
            }
        }
        Err(LlmError::Transport(format!(
            "gave up after {} attempts: {last_error}",
            self.config.retries + 1
        )))
    }
}

/// One scripted response record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRecord {
    pub agent_id: usize,
    pub month: usize,
    pub response: String,
}

/// Mock returning scripted responses keyed by (agent id, month). Reflection
/// chats use the same table.
pub struct ScriptedChatClient {
    responses: HashMap<(usize, usize), String>,
    decision_calls: AtomicUsize,
    reflection_calls: AtomicUsize,
}

impl ScriptedChatClient {
    pub fn from_records(records: impl IntoIterator<Item = ScriptRecord>) -> Self {
        ScriptedChatClient {
            responses: records.into_iter().map(|r| ((r.agent_id, r.month), r.response)).collect(),
            decision_calls: AtomicUsize::new(0),
            reflection_calls: AtomicUsize::new(0),
        }
    }

    /// Load a JSONL file of `{agent_id, month, response}` records.
    pub fn from_jsonl_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut records = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ScriptRecord = serde_json::from_str(&line).map_err(|e| {
                LlmError::Domain(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            records.push(record);
        }
        Ok(Self::from_records(records))
    }

    pub fn decision_calls(&self) -> usize {
        self.decision_calls.load(Ordering::Relaxed)
    }

    pub fn reflection_calls(&self) -> usize {
        self.reflection_calls.load(Ordering::Relaxed)
    }
}

impl ChatClient for ScriptedChatClient {
    fn chat(&self, ctx: &ChatContext, request: &ChatRequest) -> Result<ChatResponse> {
        request.validate()?;
        match ctx.kind {
            DialogueKind::Decision => self.decision_calls.fetch_add(1, Ordering::Relaxed),
            DialogueKind::Reflection => self.reflection_calls.fetch_add(1, Ordering::Relaxed),
        };
        self.responses
            .get(&(ctx.agent_id, ctx.month_index))
            .map(|content| ChatResponse { content: content.clone() })
            .ok_or(LlmError::MissingScript { agent_id: ctx.agent_id, month_index: ctx.month_index })
    }
}

/// Behavior knobs for the embedded econ-rational mock.
#[derive(Debug, Clone)]
pub struct EconRationalConfig {
    /// Work propensity while employed.
    pub work_base: f64,
    /// Added to the work propensity after an unemployed month.
    pub work_unemployed_boost: f64,
    /// Multiplier applied to the work propensity while an intervention
    /// sentence mentioning a declared national emergency is in the prompt.
    pub intervention_work_factor: f64,
    /// Consumption propensity at zero trailing unemployment.
    pub consumption_base: f64,
    /// Consumption cut per unit of trailing own-unemployment.
    pub consumption_slope: f64,
    /// Shift applied to the work propensity when the prompt reports labor
    /// market inflation (+) or deflation (-).
    pub work_trend_sensitivity: f64,
    /// Same, for the consumption propensity.
    pub consumption_trend_sensitivity: f64,
    /// Months of own employment history tracked.
    pub trailing_window: usize,
}

impl Default for EconRationalConfig {
    fn default() -> Self {
        EconRationalConfig {
            work_base: 0.85,
            work_unemployed_boost: 0.15,
            intervention_work_factor: 0.4,
            consumption_base: 0.85,
            consumption_slope: 3.0,
            work_trend_sensitivity: 0.1,
            consumption_trend_sensitivity: 0.1,
            trailing_window: 12,
        }
    }
}

/// Deterministic mock that behaves like a cautious household: it reads its
/// own prompt, lowers consumption as the unemployment it has experienced
/// accumulates, works harder right after losing a job, and pulls back from
/// the labor market while a declared emergency is in effect.
pub struct EconRationalClient {
    config: EconRationalConfig,
    history: Mutex<HashMap<usize, VecDeque<bool>>>,
    decision_calls: AtomicUsize,
    reflection_calls: AtomicUsize,
}

const UNEMPLOYMENT_CLAUSE: &str = "you became unemployed and had no income";
const EMERGENCY_CLAUSE: &str = "declared a national emergency";
const LABOR_DEFLATION_CLAUSE: &str = "deflation of the labor market";
const LABOR_INFLATION_CLAUSE: &str = "inflation of the labor market";

impl EconRationalClient {
    pub fn new(config: EconRationalConfig) -> Self {
        EconRationalClient {
            config,
            history: Mutex::new(HashMap::new()),
            decision_calls: AtomicUsize::new(0),
            reflection_calls: AtomicUsize::new(0),
        }
    }

    pub fn decision_calls(&self) -> usize {
        self.decision_calls.load(Ordering::Relaxed)
    }

    pub fn reflection_calls(&self) -> usize {
        self.reflection_calls.load(Ordering::Relaxed)
    }
}

impl Default for EconRationalClient {
    fn default() -> Self {
        Self::new(EconRationalConfig::default())
    }
}

impl ChatClient for EconRationalClient {
    fn chat(&self, ctx: &ChatContext, request: &ChatRequest) -> Result<ChatResponse> {
        request.validate()?;
        let prompt = request
            .messages
            .iter()
            .rev()
            .find(|m| m.role == ChatRole::User)
            .map(|m| m.content.as_str())
            .unwrap_or_default();

        if ctx.kind == DialogueKind::Reflection {
            self.reflection_calls.fetch_add(1, Ordering::Relaxed);
            let trailing = self.trailing_unemployment(ctx.agent_id);
            let mood = if trailing > 0.2 {
                "the labor market has been difficult and I will stay cautious about spending"
            } else {
                "conditions have been steady and my plans remain unchanged"
            };
            return Ok(ChatResponse {
                content: format!(
                    "Looking back over the quarter, {mood}. I will keep watching prices and my savings."
                ),
            });
        }

        self.decision_calls.fetch_add(1, Ordering::Relaxed);
        let unemployed = prompt.contains(UNEMPLOYMENT_CLAUSE);
        let emergency = prompt.contains(EMERGENCY_CLAUSE);
        let wage_trend = if prompt.contains(LABOR_DEFLATION_CLAUSE) {
            -1.0
        } else if prompt.contains(LABOR_INFLATION_CLAUSE) {
            1.0
        } else {
            0.0
        };
        let trailing = {
            let mut history = self.history.lock().unwrap();
            let window = history.entry(ctx.agent_id).or_default();
            window.push_back(!unemployed);
            while window.len() > self.config.trailing_window {
                window.pop_front();
            }
            window.iter().filter(|worked| !**worked).count() as f64 / window.len() as f64
        };

        let mut work = self.config.work_base
            + if unemployed { self.config.work_unemployed_boost } else { 0.0 }
            + wage_trend * self.config.work_trend_sensitivity;
        if emergency {
            work *= self.config.intervention_work_factor;
        }
        let consumption = self.config.consumption_base - self.config.consumption_slope * trailing
            + wage_trend * self.config.consumption_trend_sensitivity;
        let work = snap_to_grid(work.clamp(0.0, 1.0));
        let consumption = snap_to_grid(consumption.clamp(0.0, 1.0));
        Ok(ChatResponse {
            content: format!("{{\"work\": {work:.2}, \"consumption\": {consumption:.2}}}"),
        })
    }
}

impl EconRationalClient {
    fn trailing_unemployment(&self, agent_id: usize) -> f64 {
        let history = self.history.lock().unwrap();
        match history.get(&agent_id) {
            Some(window) if !window.is_empty() => {
                window.iter().filter(|worked| !**worked).count() as f64 / window.len() as f64
            }
            _ => 0.0,
        }
    }
}
