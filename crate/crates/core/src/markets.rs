//! Production, demand aggregation, supply/demand imbalance, stochastic
//! wage/price adjustment, and inventory-limited consumption matching.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EconError, Result};
use crate::scalar::Real;
use crate::types::{AgentState, MarketParams, PriceAdjustTiming};

/// Everything the market phase of one month produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthMarketOutcome<T> {
    /// Production S added to inventory this month.
    pub production: T,
    /// Aggregate intended demand D in goods units.
    pub total_demand: T,
    /// Imbalance (D - G) / max(D, G) in [-1, 1].
    pub imbalance: T,
    /// Price consumption cleared at (differs from the quoted price only
    /// under the before-matching adjustment timing).
    pub trading_price: T,
    /// Per-agent realized demand, ascending agent id.
    pub realized_demand: Vec<T>,
    /// Per-agent realized consumption, ascending agent id.
    pub realized_consumption: Vec<T>,
    /// Inventory left after matching.
    pub end_inventory: T,
    /// Goods price after any adjustment this month.
    pub end_price: T,
    /// Per-agent wage multipliers (1 + phi_i), ascending agent id.
    pub wage_multipliers: Vec<T>,
}

/// The market phase of one month, after labor, production, and the fiscal
/// pass: demand aggregation and imbalance at the quoted price, consumption
/// matching, and the stochastic wage/price adjustments. The price moves
/// before or after matching per `params.price_adjust_timing`.
#[allow(clippy::too_many_arguments)]
pub fn run_market_phase<T: Real>(
    agents: &mut [AgentState<T>],
    inventory_after_production: T,
    quoted_price: T,
    production: T,
    params: &MarketParams<T>,
    wage_rng: &mut impl Rng,
    price_rng: &mut impl Rng,
    order_rng: &mut impl Rng,
) -> Result<MonthMarketOutcome<T>> {
    let (total_demand, _) = aggregate_demand(agents, quoted_price)?;
    let phi = imbalance(total_demand, inventory_after_production);
    let trading_price = match params.price_adjust_timing {
        PriceAdjustTiming::BeforeMatching => adjust_price(quoted_price, phi, params, price_rng),
        PriceAdjustTiming::EndOfMonth => quoted_price,
    };
    let end_inventory =
        match_consumption(agents, inventory_after_production, trading_price, order_rng)?;
    let wage_multipliers = adjust_wages(agents, phi, params, wage_rng);
    let end_price = match params.price_adjust_timing {
        PriceAdjustTiming::EndOfMonth => adjust_price(trading_price, phi, params, price_rng),
        PriceAdjustTiming::BeforeMatching => trading_price,
    };
    Ok(MonthMarketOutcome {
        production,
        total_demand,
        imbalance: phi,
        trading_price,
        realized_demand: agents.iter().map(|a| a.realized_demand).collect(),
        realized_consumption: agents.iter().map(|a| a.realized_consumption).collect(),
        end_inventory,
        end_price,
        wage_multipliers,
    })
}

/// Production from this month's resolved labor decisions:
/// S = sum of l_j * hours * A. The caller adds S to inventory.
pub fn produce<T: Real>(agents: &[AgentState<T>], params: &MarketParams<T>) -> T {
    let per_worker = params.hours() * params.productivity;
    let mut total = T::zero();
    for agent in agents {
        if agent.worked {
            total += per_worker;
        }
    }
    total
}

/// Intended demand at the current price: d_j = p^c_j * s_j / P. Stores each
/// agent's intended consumption budget c_j = p^c_j * s_j and returns
/// (total demand, per-agent demand).
///
/// Savings must already include this month's post-tax income: the propensity
/// applies to current wealth.
pub fn aggregate_demand<T: Real>(agents: &mut [AgentState<T>], price: T) -> Result<(T, Vec<T>)> {
    if price <= T::zero() || !price.is_finite() {
        return Err(EconError::domain(format!("price {price} must be finite and > 0")));
    }
    let mut total = T::zero();
    let mut demands = Vec::with_capacity(agents.len());
    for agent in agents.iter_mut() {
        agent.intended_consumption = agent.consumption_propensity * agent.savings;
        let demand = agent.intended_consumption / price;
        total += demand;
        demands.push(demand);
    }
    Ok((total, demands))
}

/// Normalized supply/demand gap (D - G) / max(D, G), with 0 for an empty
/// market (D = G = 0, where the ratio is 0/0).
pub fn imbalance<T: Real>(demand: T, inventory: T) -> T {
    debug_assert!(demand >= T::zero() && inventory >= T::zero());
    if demand == inventory {
        return T::zero();
    }
    (demand - inventory) / demand.max(inventory)
}

/// Adjust every agent's hourly wage by an independent draw
/// phi_i ~ sign(imbalance) * U(0, alpha_w * |imbalance|), in ascending agent-id
/// order. Returns the per-agent multipliers (1 + phi_i).
pub fn adjust_wages<T: Real, R: Rng>(
    agents: &mut [AgentState<T>],
    imbalance: T,
    params: &MarketParams<T>,
    rng: &mut R,
) -> Vec<T> {
    debug_assert!(imbalance.abs() <= T::one());
    if imbalance == T::zero() {
        return vec![T::one(); agents.len()];
    }
    let bound = (params.max_wage_rate * imbalance.abs()).to_f64().unwrap();
    let sign = imbalance.signum();
    let hours = params.hours();
    let mut multipliers = Vec::with_capacity(agents.len());
    for agent in agents.iter_mut() {
        let draw: T = crate::scalar::real(rng.random_range(0.0..bound));
        let multiplier = T::one() + sign * draw;
        agent.set_hourly_wage(agent.hourly_wage * multiplier, hours);
        multipliers.push(multiplier);
    }
    multipliers
}

/// Adjust the goods price by a single draw
/// phi_P ~ sign(imbalance) * U(0, alpha_P * |imbalance|).
pub fn adjust_price<T: Real, R: Rng>(
    price: T,
    imbalance: T,
    params: &MarketParams<T>,
    rng: &mut R,
) -> T {
    debug_assert!(price > T::zero() && imbalance.abs() <= T::one());
    if imbalance == T::zero() {
        return price;
    }
    let bound = (params.max_price_rate * imbalance.abs()).to_f64().unwrap();
    let draw: T = crate::scalar::real(rng.random_range(0.0..bound));
    price * (T::one() + imbalance.signum() * draw)
}

/// Visit agents in a uniform random permutation; each gets
/// d_hat = min(d_j, remaining G) and pays c_hat = d_hat * P out of savings.
/// Returns the remaining inventory.
pub fn match_consumption<T: Real, R: Rng>(
    agents: &mut [AgentState<T>],
    inventory: T,
    price: T,
    rng: &mut R,
) -> Result<T> {
    if price <= T::zero() || !price.is_finite() {
        return Err(EconError::domain(format!("price {price} must be finite and > 0")));
    }
    let mut order: Vec<usize> = (0..agents.len()).collect();
    order.shuffle(rng);
    let mut remaining = inventory;
    for &idx in &order {
        let agent = &mut agents[idx];
        let demand = agent.intended_consumption / price;
        let served = demand.min(remaining);
        let paid = served * price;
        agent.realized_demand = served;
        agent.realized_consumption = paid;
        // paid can exceed savings by one ulp when the full budget is spent;
        // clamp so savings never go negative.
        agent.savings = (agent.savings - paid).max(T::zero());
        remaining -= served;
    }
    Ok(remaining)
}
