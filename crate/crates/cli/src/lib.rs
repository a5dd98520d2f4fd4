//! Command-line harness: phantom and mask generation, measurement synthesis,
//! reconstruction, schedule ablation and evaluation.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use error::{CliError, CliResult};
