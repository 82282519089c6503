#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for `selfnorm-core`: configuration parsing,
//! deterministic parallel replication, CSV reports and plot data.

pub mod config;
pub mod error;
pub mod experiment;
pub mod parallel;
pub mod report;
pub mod selftest;

pub use config::{parse_config, Cell, ExperimentConfig, ModelChoice};
pub use error::{LabError, Result};
pub use experiment::{run_cell, run_experiment, CellResult, ExperimentReport};
pub use parallel::Runner;
