//! Command-line front end for the `kerrteuk` library: configuration,
//! subcommands and the `verify` suites.

pub mod app;
pub mod checks;
pub mod config;
pub mod report;
