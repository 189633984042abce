//! Command-line harness around `tsc-core`: run configuration, weights files,
//! CSV artifacts and the subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod model;
