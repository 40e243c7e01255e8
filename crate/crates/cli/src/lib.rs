//! Command-line workbench around `covthresh-core`: configuration files,
//! dataset IO, parallel sweeps and SVG plots.
//!
//! Exit statuses: 0 on success, 2 for usage, configuration or input
//! errors, 3 when an estimator fails at run time.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod settings;
pub mod svg;
pub mod sweep;

pub use config::{Config, ConfigError};
pub use error::CliError;
