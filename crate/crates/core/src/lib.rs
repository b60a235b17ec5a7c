//! Core of a discrete-time agent-based macroeconomic simulator.
//!
//! One simulation step is a month. Households decide whether to work and how
//! much of their wealth to spend; production, taxation with flat
//! redistribution, demand matching against inventory, and stochastic
//! wage/price adjustment close the loop, with an annual Taylor-rule interest
//! update. The [`policies`] module defines the pluggable decision interface
//! plus the rule-based baselines; [`metrics`] computes indicators,
//! Phillips/Okun regularities, and per-agent decision regressions.
//!
//! Numeric kernels are generic over the scalar type through
//! [`scalar::Real`]; the aliases below fix the default `f64` precision used
//! by the driver.

pub mod config;
pub mod data;
pub mod error;
pub mod finance;
pub mod fiscal;
pub mod markets;
pub mod metrics;
pub mod policies;
pub mod population;
pub mod records;
pub mod rng;
pub mod scalar;
pub mod types;

pub use error::EconError;
pub use scalar::{real, Real};

/// Default simulation precision.
pub type Scalar = f64;

pub type AgentStateF64 = types::AgentState<Scalar>;
pub type EconomyStateF64 = types::EconomyState<Scalar>;
pub type TaxScheduleF64 = types::TaxSchedule<Scalar>;
pub type SimConfigF64 = config::SimConfig<Scalar>;
pub type PolicyDecisionF64 = policies::PolicyDecision<Scalar>;
pub type MonthRecordF64 = records::MonthRecord<Scalar>;
pub type YearRecordF64 = records::YearRecord<Scalar>;
