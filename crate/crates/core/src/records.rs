//! Per-period observables emitted by the simulation driver and consumed by
//! the metrics suite and file outputs.

use serde::{Deserialize, Serialize};

use crate::types::CalendarDate;

/// One agent's observables for one completed month.
///
/// `savings` and `hourly_wage` are the decision-time values (after any
/// annual interest accrual, before the month's income and the end-of-month
/// wage adjustment); the remaining fields are the month's outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMonthSnapshot<T> {
    pub agent_id: usize,
    pub work_propensity: T,
    pub consumption_propensity: T,
    pub worked: bool,
    pub income: T,
    pub tax: T,
    pub redistribution: T,
    pub realized_consumption: T,
    pub realized_demand: T,
    pub savings: T,
    pub hourly_wage: T,
}

/// One completed month of the simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthRecord<T> {
    pub month_index: usize,
    pub date: CalendarDate,
    /// Price goods traded at this month.
    pub price: T,
    /// Interest rate in effect this month.
    pub interest_rate: T,
    /// Production S.
    pub production: T,
    /// Aggregate intended demand D.
    pub total_demand: T,
    /// (D - G) / max(D, G).
    pub imbalance: T,
    pub employed_count: usize,
    /// Decision-parse fallbacks this month (LLM policy only).
    pub fallback_count: u32,
    pub agents: Vec<AgentMonthSnapshot<T>>,
}

impl<T: crate::scalar::Real> MonthRecord<T> {
    /// Population mean hourly wage in effect this month, accumulated in
    /// ascending agent-id order.
    pub fn mean_hourly_wage(&self) -> T {
        let mut total = T::zero();
        for a in &self.agents {
            total += a.hourly_wage;
        }
        total / T::from_usize(self.agents.len()).unwrap()
    }
}

/// Annual indicators for one completed simulation year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRecord<T> {
    /// 1-based simulation year.
    pub year_index: usize,
    pub calendar_year: i32,
    pub nominal_gdp: T,
    /// Nominal GDP revalued at the reference-year (year 1) mean price.
    pub real_gdp: T,
    /// Mean-price inflation vs. the previous year (year 1: vs. the initial
    /// price).
    pub price_inflation: T,
    /// Mean-wage inflation vs. the previous year (year 1: vs. the initial
    /// mean wage).
    pub wage_inflation: T,
    pub unemployment: T,
    /// Relative unemployment growth; None for year 1 or when the previous
    /// year's unemployment is 0.
    pub unemployment_growth: Option<T>,
    /// Relative real-GDP growth; None for year 1 or when the previous year's
    /// real GDP is 0.
    pub real_gdp_growth: Option<T>,
    pub mean_price: T,
    /// Annual mean of the monthly population-mean hourly wages.
    pub mean_wage: T,
}

/// One chat exchange, as persisted to the dialogue log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub agent_id: usize,
    pub month_index: usize,
    /// "decision" or "reflection".
    pub kind: String,
    pub prompt: String,
    pub response: String,
}
