//! Run configuration. A config file is a single JSON document mirroring
//! [`SimConfig`]; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{EconError, Result};
use crate::policies::RulePolicyParams;
use crate::scalar::{real, Real};
use crate::types::{CalendarDate, MarketParams, TaxSchedule, TaylorParams};

/// Which household decision policy drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    #[default]
    Len,
    Cats,
    Composite,
    Scripted,
    Llm,
}

impl PolicyKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "len" => Ok(PolicyKind::Len),
            "cats" => Ok(PolicyKind::Cats),
            "composite" => Ok(PolicyKind::Composite),
            "scripted" => Ok(PolicyKind::Scripted),
            "llm" => Ok(PolicyKind::Llm),
            other => Err(EconError::config(
                "policy.kind",
                format!("unknown policy {other:?}, expected len|cats|composite|scripted|llm"),
            )),
        }
    }
}

/// Which chat-completion client backs the LLM policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmClientKind {
    /// Deterministic embedded rule reacting to its own prompts.
    #[default]
    EconRational,
    /// Responses scripted per (agent, month) from a JSONL file.
    Scripted,
    /// Live OpenAI-compatible HTTP endpoint.
    Live,
}

/// Settings for the LLM policy and its chat client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmSettings {
    pub client: LlmClientKind,
    /// JSONL of `{agent_id, month, response}` records for the scripted client.
    pub script_path: Option<PathBuf>,
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the API key for live runs.
    pub api_key_env: String,
    pub timeout_secs: u64,
    /// Retries on transport errors / rate limits before the run aborts.
    pub transport_retries: u32,
    pub retry_backoff_ms: u64,
    /// Re-asks after an unparseable completion before falling back.
    pub parse_retries: u32,
    /// Max concurrent decision chats within a month.
    pub parallelism: usize,
    pub temperature: f64,
    /// Memory window L: decision dialogues kept from the previous L months.
    pub memory_window: usize,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings {
            client: LlmClientKind::default(),
            script_path: None,
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-3.5-turbo".into(),
            api_key_env: "ECON_LLM_API_KEY".into(),
            timeout_secs: 30,
            transport_retries: 3,
            retry_backoff_ms: 500,
            parse_retries: 3,
            parallelism: 1,
            temperature: 0.0,
            memory_window: 1,
        }
    }
}

/// Policy selection plus hyperparameters for every kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PolicyConfig<T> {
    #[serde(default)]
    pub kind: PolicyKind,
    /// Rule-policy hyperparameters (beta, gamma, h, epsilon).
    #[serde(default = "RulePolicyParams::default_params")]
    pub rule: RulePolicyParams<T>,
    /// Probability that a composite agent adopts the LEN consumption rule.
    #[serde(default = "defaults::half")]
    pub len_weight: T,
    /// Constant work propensity for the scripted policy.
    #[serde(default = "defaults::half")]
    pub scripted_work: T,
    /// Constant consumption propensity for the scripted policy.
    #[serde(default = "defaults::half")]
    pub scripted_consumption: T,
    #[serde(default)]
    pub llm: LlmSettings,
}

impl<T: Real> Default for PolicyConfig<T> {
    fn default() -> Self {
        PolicyConfig {
            kind: PolicyKind::default(),
            rule: RulePolicyParams::default_params(),
            len_weight: defaults::half(),
            scripted_work: defaults::half(),
            scripted_consumption: defaults::half(),
            llm: LlmSettings::default(),
        }
    }
}

/// Pareto parameters for hourly-wage sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct ParetoParams<T> {
    pub scale: T,
    pub shape: T,
}

impl<T: Real> Default for ParetoParams<T> {
    fn default() -> Self {
        // Loose fit of the hourly-wage distribution to 2018 U.S. monthly-wage
        // deciles at 168 hours/month.
        ParetoParams { scale: real(13.0), shape: real(0.75) }
    }
}

/// Tax schedule source: inline `brackets`/`rates` (defaulting to the monthly
/// U.S. schedule) or a `bracket,rate` CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct TaxConfig<T> {
    #[serde(default = "defaults::us_brackets")]
    pub brackets: Vec<T>,
    #[serde(default = "defaults::us_rates")]
    pub rates: Vec<T>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl<T: Real> Default for TaxConfig<T> {
    fn default() -> Self {
        TaxConfig {
            brackets: defaults::us_brackets(),
            rates: defaults::us_rates(),
            csv: None,
        }
    }
}

impl<T: Real> TaxConfig<T> {
    pub fn resolve(&self) -> Result<TaxSchedule<T>> {
        match &self.csv {
            Some(path) => TaxSchedule::from_csv_path(path),
            None => TaxSchedule::new(self.brackets.clone(), self.rates.clone()),
        }
    }
}

/// A sentence injected into decision prompts from its activation date onward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intervention {
    pub activation: CalendarDate,
    pub sentence: String,
}

/// Overrides for the bundled profile data files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataFiles {
    pub ages: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub job_titles: Option<PathBuf>,
}

/// Full simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SimConfig<T> {
    #[serde(default = "defaults::num_agents")]
    pub num_agents: usize,
    #[serde(default = "defaults::num_months")]
    pub num_months: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::start_date")]
    pub start_date: CalendarDate,
    #[serde(default)]
    pub policy: PolicyConfig<T>,
    #[serde(default)]
    pub tax: TaxConfig<T>,
    #[serde(default)]
    pub market: MarketParams<T>,
    #[serde(default)]
    pub taylor: TaylorParams<T>,
    #[serde(default)]
    pub wage_pareto: ParetoParams<T>,
    #[serde(default)]
    pub interventions: Vec<Intervention>,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub data_files: DataFiles,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        SimConfig {
            num_agents: defaults::num_agents(),
            num_months: defaults::num_months(),
            seed: 0,
            start_date: defaults::start_date(),
            policy: PolicyConfig::default(),
            tax: TaxConfig::default(),
            market: MarketParams::default(),
            taylor: TaylorParams::default(),
            wage_pareto: ParetoParams::default(),
            interventions: Vec::new(),
            output_dir: defaults::output_dir(),
            data_files: DataFiles::default(),
        }
    }
}

impl<T: Real> SimConfig<T> {
    /// Check every invariant, naming the offending field on failure.
    pub fn validate(&self) -> Result<()> {
        if self.num_agents < 1 {
            return Err(EconError::config("num_agents", "must be >= 1"));
        }
        if self.num_months < 12 {
            return Err(EconError::config("num_months", "must be >= 12"));
        }
        if self.wage_pareto.shape <= T::zero() || !self.wage_pareto.shape.is_finite() {
            return Err(EconError::config("wage_pareto.shape", "must be > 0"));
        }
        if self.wage_pareto.scale <= T::zero() || !self.wage_pareto.scale.is_finite() {
            return Err(EconError::config("wage_pareto.scale", "must be > 0"));
        }
        self.market.validate()?;
        self.taylor.validate()?;
        self.policy.rule.validate()?;
        for field in [
            ("policy.len_weight", self.policy.len_weight),
            ("policy.scripted_work", self.policy.scripted_work),
            ("policy.scripted_consumption", self.policy.scripted_consumption),
        ] {
            if field.1 < T::zero() || field.1 > T::one() {
                return Err(EconError::config(field.0, "must be in [0, 1]"));
            }
        }
        if self.policy.kind == PolicyKind::Llm {
            if self.policy.llm.parallelism == 0 {
                return Err(EconError::config("policy.llm.parallelism", "must be >= 1"));
            }
            if self.policy.llm.client == LlmClientKind::Scripted
                && self.policy.llm.script_path.is_none()
            {
                return Err(EconError::config(
                    "policy.llm.script_path",
                    "required for the scripted client",
                ));
            }
        }
        self.tax.resolve()?;
        let end = self.start_date.plus_months(self.num_months - 1);
        for (i, iv) in self.interventions.iter().enumerate() {
            if iv.activation.months_since(self.start_date) < 0 || iv.activation > end {
                return Err(EconError::config(
                    format!("interventions[{i}].activation"),
                    format!("{} outside the simulated horizon {}..={}", iv.activation, self.start_date, end),
                ));
            }
            if iv.sentence.trim().is_empty() {
                return Err(EconError::config(format!("interventions[{i}].sentence"), "must be non-empty"));
            }
        }
        Ok(())
    }
}

mod defaults {
    use super::CalendarDate;
    use crate::scalar::{real, Real};
    use std::path::PathBuf;

    pub fn num_agents() -> usize {
        100
    }
    pub fn num_months() -> usize {
        240
    }
    pub fn start_date() -> CalendarDate {
        CalendarDate { year: 2001, month: 1 }
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("runs/out")
    }
    pub fn half<T: Real>() -> T {
        real(0.5)
    }
    pub fn us_brackets<T: Real>() -> Vec<T> {
        [0.00, 808.33, 3289.58, 7016.67, 13393.75, 17008.33, 42525.00]
            .iter()
            .map(|&b| real(b))
            .collect()
    }
    pub fn us_rates<T: Real>() -> Vec<T> {
        [0.10, 0.12, 0.22, 0.24, 0.32, 0.35, 0.37].iter().map(|&r| real(r)).collect()
    }
}
