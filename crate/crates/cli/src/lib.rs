//! Library half of the `grafield` command-line tool: input parsing, command
//! dispatch and output writers. The binary is a thin wrapper around
//! [`config::parse_args`] and [`commands::run`].

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod plot;

pub use commands::run;
pub use config::{parse_args, RunConfig};
pub use error::{CliError, CliResult};
pub use io::{parse_edgelist, parse_edgelist_str, parse_event_matrix, write_edgelist, EdgeListFormat};
