//! Command-line front end: scene files, CSV tables and the subcommands.

pub mod app;
pub mod config;
pub mod csv;
