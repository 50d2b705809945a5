//! Config parsing, experiment execution and CSV output for the `netobs` tool.

pub mod config;
pub mod output;
pub mod runner;
pub mod units;

pub use config::{parse_config, render, ConfigError, ScenarioConfig};
pub use runner::{run, Overrides, RunOutcome};
