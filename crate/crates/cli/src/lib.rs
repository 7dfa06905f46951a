//! Job files and commands behind the `persson` binary.

pub mod config;
pub mod job;
