//! File formats and subcommands behind the `gatelim` binary.

pub mod format;
pub mod run;

pub use format::{parse_circuit, parse_subspace, print_circuit, print_subspace, FormatError};
pub use run::{run, Cli, CliError, Command, Report};
