//! Scenario runner for the mcforge verifier suites.
//!
//! A scenario names a fixture and a list of suites; [`runner::run`] turns it
//! into a [`report::Report`] whose JSON form is byte-identical across runs
//! and thread counts.

pub mod registry;
pub mod report;
pub mod runner;
pub mod scenario;

use thiserror::Error;

/// Problems with the scenario or the command line. These map to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
}

pub use report::{CheckRecord, Environment, Report, Summary};
pub use runner::run;
pub use scenario::{load_scenario, Kind, Scenario};
