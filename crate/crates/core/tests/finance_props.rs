//! Property tests for the annual financial step.

use econ_core::finance::{accrue_interest, annual_stats, taylor_rate, AnnualStats};
use econ_core::records::{AgentMonthSnapshot, MonthRecord};
use econ_core::types::{AgentState, CalendarDate, TaylorParams};
use proptest::prelude::*;

fn stats(inflation: f64, unemployment: f64) -> AnnualStats<f64> {
    AnnualStats { year_index: 1, mean_price: 100.0, inflation, unemployment, mean_wage: 10.0 }
}

proptest! {
    #[test]
    fn taylor_is_monotone_and_floored(
        pi_lo in -1.0..1.0f64,
        bump in 0.0..1.0f64,
        u_lo in 0.0..1.0f64,
        u_bump in 0.0..0.5f64,
    ) {
        let params = TaylorParams::<f64>::default();
        // Non-decreasing in inflation.
        let r_lo = taylor_rate(&stats(pi_lo, u_lo), &params);
        let r_hi = taylor_rate(&stats(pi_lo + bump, u_lo), &params);
        prop_assert!(r_hi + 1e-15 >= r_lo);
        // Non-increasing in unemployment.
        let r_u = taylor_rate(&stats(pi_lo, (u_lo + u_bump).min(1.0)), &params);
        prop_assert!(r_u <= r_lo + 1e-15);
        prop_assert!(r_lo >= 0.0 && r_hi >= 0.0 && r_u >= 0.0);
    }

    #[test]
    fn accrual_preserves_savings_ordering(
        savings in prop::collection::vec(0.0..1e9f64, 2..30),
        rate in 0.0..0.5f64,
    ) {
        let mut agents: Vec<AgentState<f64>> = savings
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut a = AgentState::new(i, format!("a{i}"), 30, "c".into(), "j".into(), 10.0, 168.0);
                a.savings = s;
                a
            })
            .collect();
        accrue_interest(&mut agents, rate);
        for i in 0..agents.len() {
            for j in 0..agents.len() {
                if savings[i] <= savings[j] {
                    prop_assert!(agents[i].savings <= agents[j].savings);
                }
            }
        }
    }

    #[test]
    fn annual_inflation_matches_independent_mean(
        prices in prop::collection::vec(1.0..1e4f64, 12),
        prev in 1.0..1e4f64,
    ) {
        let months: Vec<MonthRecord<f64>> = prices
            .iter()
            .enumerate()
            .map(|(m, &price)| MonthRecord {
                month_index: m,
                date: CalendarDate::new(2001, 1).unwrap().plus_months(m),
                price,
                interest_rate: 0.01,
                production: 0.0,
                total_demand: 0.0,
                imbalance: 0.0,
                employed_count: 1,
                fallback_count: 0,
                agents: vec![AgentMonthSnapshot {
                    agent_id: 0,
                    work_propensity: 1.0,
                    consumption_propensity: 0.0,
                    worked: true,
                    income: 0.0,
                    tax: 0.0,
                    redistribution: 0.0,
                    realized_consumption: 0.0,
                    realized_demand: 0.0,
                    savings: 0.0,
                    hourly_wage: 10.0,
                }],
            })
            .collect();
        let got = annual_stats(&months, prev, 1).unwrap();
        let mean: f64 = prices.iter().sum::<f64>() / 12.0;
        let want = (mean - prev) / prev;
        prop_assert!((got.inflation - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}
