//! Library side of the `polplace` command-line tool: file formats, system
//! generation and the subcommands.

pub mod commands;
pub mod error;
pub mod files;
pub mod generate;

pub use error::{CliError, CliResult};
