//! Configuration and subcommands behind the `fput` binary.

pub mod commands;
pub mod config;

pub use commands::{CliError, CliResult};
pub use config::{ConfigError, RunConfig};
