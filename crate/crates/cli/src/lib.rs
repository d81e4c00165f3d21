//! Command-line plumbing for drumshape: configuration, run manifests and
//! shape export.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, Outcome};
pub use config::{Format, RunConfig};
pub use error::{CliError, Result};
