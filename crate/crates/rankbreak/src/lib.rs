//! Experiment harness around `rankbreak-core`: TOML configuration, parallel
//! multi-seed batches, CSV output and numerical self-tests.

pub mod batch;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selfcheck;

pub use batch::{BatchOutput, Job};
pub use config::Config;
pub use error::{AppError, AppResult};
