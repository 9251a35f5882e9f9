//! Command-line front end for the gustqa pipeline.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult, ExitCode};
