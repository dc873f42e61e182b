//! Config-driven runner for the `conewalk` experiments.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{apply_env_overrides, parse_config, Experiment, RunConfig};
pub use runner::{run, RunOutcome};
