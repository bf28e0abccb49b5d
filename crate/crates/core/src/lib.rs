//! Dispatching jobs to parallel FCFS queues.
//!
//! The crate bundles job-size distributions, dispatch policies (CARD and
//! its variants plus the usual baselines), an exact workload simulator,
//! closed-form heavy-traffic constants and bounds, and an experiment runner
//! driven by TOML configs.

pub mod analytics;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod numeric;
pub mod policies;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use distributions::{DistSpec, JobSizeModel};
pub use error::{Error, Result};
pub use policies::{CardConfig, PolicyConfig, ShortSelection, WorkVector};
pub use simulator::{run_trial, SimConfig, TrialResult};
