//! Run configuration, subcommand implementations and reports.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod headmode;
pub mod report;
pub mod run;

pub use config::{CsvSource, DataConfig, MetricsConfig, RunConfig};
