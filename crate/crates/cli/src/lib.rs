//! Command-line front end: problem files, trajectory CSV, JSON reports and
//! the exit-code contract.

pub mod commands;
pub mod error;
pub mod io;
pub mod problem;

pub use commands::{run, Cli};
pub use error::{exit, CliError};
