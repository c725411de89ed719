//! Experiment runner: config parsing, the experiment catalog, CSV emission
//! and seed manifests for exact re-runs.

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod manifest;

pub use config::{ExperimentConfig, Overrides, RunConfig};
pub use error::CliError;
pub use experiments::{run, Check, RunOutcome};
