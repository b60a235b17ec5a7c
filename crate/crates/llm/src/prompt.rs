//! Decision and reflection prompt construction.
//!
//! The decision prompt is a pure function of (agent, month context,
//! observation, tax schedule): identical inputs render byte-identical text.
//! Inflation/deflation wording is keyed to the sign of the month-over-month
//! change of the agent's wage (income sentence) and of the goods price
//! (price sentence). Missing fields fail fast rather than rendering blanks.

use econ_core::policies::{EconObservation, MonthContext};
use econ_core::scalar::Real;
use econ_core::types::{AgentState, CalendarDate, TaxSchedule};
use serde::{Deserialize, Serialize};

use crate::error::{LlmError, Result};
use crate::memory::MemoryPool;
use crate::types::{ChatMessage, ChatRequest, Dialogue};

const TAX_PREAMBLE: &str = "As with all Americans, a portion of your monthly income is taxed by \
the federal government. This taxation system is tiered, income is taxed cumulatively within \
defined brackets, combined with a redistributive policy: after collection, the government evenly \
redistributes the tax revenue back to all citizens, irrespective of their earnings.";

const CLOSING: &str = "With all these factors in play, and considering aspects like your living \
costs, any future aspirations, and the broader economic trends, how is your willingness to work \
this month? Furthermore, how would you plan your expenditures on essential goods, keeping in \
mind goods price? Please share your decisions in a JSON format. The format should have two \
keys: 'work' (a value between 0 and 1 with intervals of 0.02, indicating the willingness or \
propensity to work) and 'consumption' (a value between 0 and 1 with intervals of 0.02, \
indicating the proportion of all your savings and income you intend to spend on essential \
goods).";

/// Verbatim quarterly reflection question.
pub const REFLECTION_QUESTION: &str = "Given the previous quarter's economic environment, \
reflect on the labor, consumption, and financial markets, as well as their dynamics. What \
conclusions have you drawn?";

fn money<T: Real>(label: &'static str, x: T) -> Result<String> {
    if !x.is_finite() {
        return Err(LlmError::MissingField(label));
    }
    Ok(format!("{x:.2}"))
}

fn number_list<T: Real>(values: &[T]) -> String {
    values.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(", ")
}

/// Render the monthly decision prompt.
pub fn render_decision_prompt<T: Real>(
    agent: &AgentState<T>,
    ctx: &MonthContext<T>,
    obs: &EconObservation<T>,
    schedule: &TaxSchedule<T>,
) -> Result<String> {
    if agent.name.trim().is_empty() {
        return Err(LlmError::MissingField("name"));
    }
    if agent.city.trim().is_empty() {
        return Err(LlmError::MissingField("city"));
    }
    if agent.job_title.trim().is_empty() {
        return Err(LlmError::MissingField("job_title"));
    }
    if ctx.price <= T::zero() || !ctx.price.is_finite() {
        return Err(LlmError::MissingField("price"));
    }
    if !ctx.interest_rate.is_finite() {
        return Err(LlmError::MissingField("interest_rate"));
    }
    let first_month = obs.worked_last_month.is_none();

    let mut parts: Vec<String> = Vec::new();
    parts.push(format!(
        "You're {}, a {}-year-old individual living in {}.",
        agent.name, agent.age, agent.city
    ));
    parts.push(TAX_PREAMBLE.to_string());
    parts.push(format!("Now it's {}.", ctx.date.dotted()));

    let income = money("expected_income", obs.expected_income)?;
    match obs.worked_last_month {
        Some(true) => {
            let prev_wage =
                obs.prev_monthly_wage.ok_or(LlmError::MissingField("prev_monthly_wage"))?;
            let change = match obs
                .expected_income
                .partial_cmp(&prev_wage)
                .ok_or(LlmError::MissingField("prev_monthly_wage"))?
            {
                std::cmp::Ordering::Less => {
                    ", which is decreased compared to the last month due to the deflation of the labor market"
                }
                std::cmp::Ordering::Greater => {
                    ", which is increased compared to the last month due to the inflation of the labor market"
                }
                std::cmp::Ordering::Equal => "",
            };
            parts.push(format!(
                "In the previous month, you worked as a(an) {}. If you continue working this month, your expected income will be ${income}{change}.",
                agent.job_title
            ));
        }
        Some(false) => {
            parts.push("In the previous month, you became unemployed and had no income.".to_string());
            parts.push(format!(
                "Now, you are invited to work as a(an) {} with a monthly salary of ${income}.",
                agent.job_title
            ));
        }
        None => {
            parts.push(format!(
                "Now, you are invited to work as a(an) {} with a monthly salary of ${income}.",
                agent.job_title
            ));
        }
    }

    if !first_month {
        parts.push(format!("Besides, your consumption was ${}.", money("prev_consumption", obs.prev_consumption)?));
        parts.push(format!("Your tax deduction amounted to ${}.", money("prev_tax", obs.prev_tax)?));
        parts.push(format!(
            "However, as part of the government's redistribution program, you received a credit of ${}.",
            money("prev_redistribution", obs.prev_redistribution)?
        ));
    }

    parts.push(format!(
        "In this month, the government sets the brackets: [{}] and their corresponding rates: [{}].",
        number_list(schedule.brackets()),
        number_list(schedule.rates())
    ));
    parts.push("Income earned within each bracket is taxed only at that bracket's rate.".to_string());

    let price = money("price", ctx.price)?;
    let price_sentence = match ctx.prev_price {
        Some(prev) if ctx.price < prev => format!(
            "Meanwhile, deflation has led to a price decrease in the consumption market, with the average price of essential goods now at ${price}."
        ),
        Some(prev) if ctx.price > prev => format!(
            "Meanwhile, inflation has led to a price increase in the consumption market, with the average price of essential goods now at ${price}."
        ),
        _ => format!("Meanwhile, the average price of essential goods is now at ${price}."),
    };
    if !first_month && ctx.prev_price.is_none() {
        return Err(LlmError::MissingField("prev_price"));
    }
    parts.push(price_sentence);

    parts.push(format!(
        "Your current savings account balance is ${}.",
        money("savings", obs.savings)?
    ));
    let hundred = econ_core::real::<T>(100.0);
    parts.push(format!(
        "Interest rates, as set by your bank, stand at {}%.",
        money("interest_rate", ctx.interest_rate * hundred)?
    ));

    for sentence in &ctx.interventions {
        if sentence.trim().is_empty() {
            return Err(LlmError::MissingField("intervention sentence"));
        }
        parts.push(sentence.clone());
    }

    parts.push(CLOSING.to_string());
    Ok(parts.join(" "))
}

/// Assemble the full chat request: the memory window as prior turns followed
/// by the rendered prompt as the new user message.
pub fn build_decision_request<T: Real>(
    agent: &AgentState<T>,
    ctx: &MonthContext<T>,
    obs: &EconObservation<T>,
    schedule: &TaxSchedule<T>,
    memory: &MemoryPool,
    model: &str,
    temperature: f64,
) -> Result<(String, ChatRequest)> {
    let prompt = render_decision_prompt(agent, ctx, obs, schedule)?;
    let mut messages = memory.window_messages();
    messages.push(ChatMessage::user(prompt.clone()));
    let request = ChatRequest { model: model.to_string(), messages, temperature };
    request.validate()?;
    Ok((prompt, request))
}

/// Concatenate a quarter's dialogues and append the reflection question.
pub fn build_reflection_prompt(quarter: &[Dialogue]) -> Result<String> {
    if quarter.len() != 3 {
        return Err(LlmError::Domain(format!(
            "reflection needs exactly one quarter (3 monthly dialogues), got {}",
            quarter.len()
        )));
    }
    let mut text = String::new();
    for dialogue in quarter {
        text.push_str(&dialogue.prompt_text);
        text.push('\n');
        text.push_str("Your response: ");
        text.push_str(&dialogue.response_text);
        text.push_str("\n\n");
    }
    text.push_str(REFLECTION_QUESTION);
    Ok(text)
}

/// A standalone decision-prompt state, loadable from JSON for rendering via
/// the CLI and golden tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptFixture {
    pub name: String,
    pub age: u32,
    #[serde(default = "default_city")]
    pub city: String,
    pub job_title: String,
    pub date: CalendarDate,
    #[serde(default = "default_month_index")]
    pub month_index: usize,
    pub expected_income: f64,
    pub savings: f64,
    #[serde(default)]
    pub prev_consumption: f64,
    #[serde(default)]
    pub prev_tax: f64,
    #[serde(default)]
    pub prev_redistribution: f64,
    pub price: f64,
    #[serde(default)]
    pub prev_price: Option<f64>,
    #[serde(default)]
    pub prev_monthly_wage: Option<f64>,
    #[serde(default)]
    pub worked_last_month: Option<bool>,
    pub interest_rate: f64,
    #[serde(default)]
    pub interventions: Vec<String>,
    #[serde(default)]
    pub tax_brackets: Option<Vec<f64>>,
    #[serde(default)]
    pub tax_rates: Option<Vec<f64>>,
}

fn default_city() -> String {
    econ_core::population::DEFAULT_CITY.to_string()
}

fn default_month_index() -> usize {
    1
}

impl PromptFixture {
    pub fn render(&self) -> Result<String> {
        let agent: AgentState<f64> = AgentState::new(
            0,
            self.name.clone(),
            self.age,
            self.city.clone(),
            self.job_title.clone(),
            self.expected_income / 168.0,
            168.0,
        );
        let ctx = MonthContext {
            month_index: self.month_index,
            date: self.date,
            price: self.price,
            prev_price: self.prev_price,
            interest_rate: self.interest_rate,
            interventions: self.interventions.clone(),
        };
        let obs = EconObservation {
            expected_income: self.expected_income,
            savings: self.savings,
            prev_consumption: self.prev_consumption,
            prev_tax: self.prev_tax,
            prev_redistribution: self.prev_redistribution,
            prev_monthly_wage: self.prev_monthly_wage,
            worked_last_month: self.worked_last_month,
        };
        let schedule = match (&self.tax_brackets, &self.tax_rates) {
            (Some(brackets), Some(rates)) => TaxSchedule::new(brackets.clone(), rates.clone())
                .map_err(|e| LlmError::Template(e.to_string()))?,
            (None, None) => TaxSchedule::us_2018_monthly(),
            _ => {
                return Err(LlmError::Template(
                    "tax_brackets and tax_rates must be given together".into(),
                ))
            }
        };
        render_decision_prompt(&agent, &ctx, &obs, &schedule)
    }
}
