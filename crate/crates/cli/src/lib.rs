//! Experiment runner for the Husimi Q entanglement criteria.
//!
//! Each subcommand resolves an [`ExperimentConfig`] from flags and an
//! optional JSON file, runs it, and writes plot-ready tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;
pub mod experiments;
pub mod table;

pub use config::{ConfigError, Experiment, ExperimentConfig, Format};
pub use experiments::{catalogue, run, write_outputs, OutputFile};
