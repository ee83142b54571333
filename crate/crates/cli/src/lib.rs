//! Configuration, orchestration and figures for the `dgbo` command-line tool.

pub mod config;
pub mod plots;
pub mod suites;

pub use config::ExperimentConfig;
