//! Annual interest accrual and the Taylor-rule interest-rate update.

use serde::{Deserialize, Serialize};

use crate::error::{EconError, Result};
use crate::records::MonthRecord;
use crate::scalar::Real;
use crate::types::{AgentState, TaylorParams};

/// Aggregates of one completed simulation year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualStats<T> {
    /// 1-based year index.
    pub year_index: usize,
    /// Mean of the 12 monthly goods prices.
    pub mean_price: T,
    /// (mean_price - prev_mean_price) / prev_mean_price.
    pub inflation: T,
    /// Share of agent-months without work.
    pub unemployment: T,
    /// Mean of the 12 monthly population-mean hourly wages.
    pub mean_wage: T,
}

/// Fold a 12-month slice into annual statistics. `prev_mean_price` is the
/// previous year's mean price (the initial goods price for year 1).
pub fn annual_stats<T: Real>(
    months: &[MonthRecord<T>],
    prev_mean_price: T,
    num_agents: usize,
) -> Result<AnnualStats<T>> {
    if months.len() != 12 {
        return Err(EconError::domain(format!("annual_stats needs exactly 12 months, got {}", months.len())));
    }
    if prev_mean_price <= T::zero() {
        return Err(EconError::domain("previous mean price must be > 0"));
    }
    let twelve = T::from_usize(12).unwrap();
    let mut price_sum = T::zero();
    let mut wage_sum = T::zero();
    let mut idle_months = 0usize;
    for month in months {
        price_sum += month.price;
        wage_sum += month.mean_hourly_wage();
        idle_months += num_agents - month.employed_count;
    }
    let mean_price = price_sum / twelve;
    let unemployment =
        T::from_usize(idle_months).unwrap() / (twelve * T::from_usize(num_agents).unwrap());
    Ok(AnnualStats {
        year_index: months[0].month_index / 12 + 1,
        mean_price,
        inflation: (mean_price - prev_mean_price) / prev_mean_price,
        unemployment,
        mean_wage: wage_sum / twelve,
    })
}

/// Taylor rule with a zero floor:
/// r = max(r^n + pi^t + alpha^pi (pi - pi^t) + alpha^u (u^n - u), 0).
pub fn taylor_rate<T: Real>(stats: &AnnualStats<T>, params: &TaylorParams<T>) -> T {
    let raw = params.natural_rate
        + params.target_inflation
        + params.inflation_coeff * (stats.inflation - params.target_inflation)
        + params.unemployment_coeff * (params.natural_unemployment - stats.unemployment);
    raw.max(T::zero())
}

/// Multiply every agent's savings by (1 + rate).
pub fn accrue_interest<T: Real>(agents: &mut [AgentState<T>], rate: T) {
    debug_assert!(rate >= T::zero());
    let factor = T::one() + rate;
    for agent in agents.iter_mut() {
        agent.savings *= factor;
    }
}
