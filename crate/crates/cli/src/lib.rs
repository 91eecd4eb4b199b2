//! Command implementations and the session service behind the `rbsa` binary.

pub mod commands;
pub mod server;

pub use commands::Outcome;
