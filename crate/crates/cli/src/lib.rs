//! Command-line front end: grid subcommands, run files and CSV output.

pub mod app;
pub mod config;
pub mod error;
pub mod grid_csv;

pub use error::CliError;
