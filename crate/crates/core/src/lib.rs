//! Seeded simulator for cooperative multi-armed bandits on networks.
//!
//! Agents on an undirected graph each pull arms and share observations
//! over an imperfect channel (link failures, delays, corruption). The
//! [`harness`] runs repetitions in parallel and aggregates group regret.

pub mod comm;
pub mod config;
pub mod env;
pub mod error;
pub mod graph;
pub mod harness;
pub mod output;
pub mod policy;
pub mod repro;
pub mod rng;

pub use config::{ExperimentConfig, GammaSetting, Theorem};
pub use error::{Error, Result};
pub use harness::{run_experiment, run_single, run_single_detailed, sweep, theory_bound, AggregateResult, RunOptions};
