//! File formats, configuration and command bodies for the `smc-bench`
//! command-line tool.

pub mod commands;
pub mod config;
mod error;
pub mod io;

pub use error::{CliError, Result};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "SMC_BENCH_OUT_DIR";
