//! Batch runner for the islp solver: settings, trace and summary files.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{Mode, RunConfig, TraceLevel};
pub use error::CliError;
pub use runner::{run, RunOutcome};
