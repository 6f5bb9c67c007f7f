//! Library side of the `su2is` command: argument types, table output and the
//! `state`, `sweep`, `figure` and `verify` commands.

pub mod args;
pub mod config;
pub mod error;
pub mod figure;
pub mod output;
pub mod state;
pub mod sweep;
pub mod verify;

pub use error::{CliError, Result};
