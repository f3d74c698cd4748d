//! Configuration, output files and subcommands of the `swa` binary.

pub mod commands;
pub mod config;
pub mod output;
