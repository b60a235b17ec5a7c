//! Simulation driver, persistence, and scenario wiring.

pub mod driver;
pub mod output;

pub use driver::{build_policy, recompute_metrics, run_simulation, RunOutput, World};
pub use output::RunManifest;
