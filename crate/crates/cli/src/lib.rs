//! Command line front end and HTTP service for the match simulator and the
//! structure learning tools.

pub mod api;
pub mod commands;
pub mod error;

pub use error::CliError;
