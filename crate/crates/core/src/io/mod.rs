//! Configuration, matrix files and reports.

pub mod config;
pub mod matrix_file;
pub mod report;

pub use config::{load_config, parse_config, parse_config_with, parse_override, ConfigError, Mode, RunConfig};
pub use matrix_file::{format_matrix, parse_matrix, MatrixFileError};
