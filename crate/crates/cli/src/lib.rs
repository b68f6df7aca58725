//! Command-line front end for the `rachbound` library: config-file driven
//! runs of the bound/oracle/simulation engines, CSV and SVG output, and a
//! bound-vs-simulation dominance checker.

pub mod compare;
pub mod config;
pub mod engine;
pub mod rows;
pub mod svg;

use std::fmt;

/// Invalid configuration or invalid input data. Distinguished from runtime
/// failures so the binary can exit with a dedicated status code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Exit status: invalid configuration or input (2), any other failure (1).
pub fn classify_error(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(core) = cause.downcast_ref::<rachbound::Error>() {
            if matches!(core, rachbound::Error::InvalidInput(_)) {
                return 2;
            }
        }
    }
    1
}
