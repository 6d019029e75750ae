//! File formats and command-line pipeline around `ssamt_core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod report;
