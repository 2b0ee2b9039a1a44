//! Command-line harness: config ingestion, experiment orchestration and CSV
//! emission for the network-tomography simulator.

pub mod commands;
pub mod config;
pub mod output;
pub mod runner;
pub mod validate;

/// CLI failure classes, mapped one-to-one onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or config: exit code 1.
    Validation(String),
    /// Estimation or model failure: exit code 2.
    Estimation(String),
    /// Invariant-suite failure: exit code 3.
    InvariantSuite(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Estimation(_) => 2,
            CliError::InvariantSuite(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Estimation(m) | CliError::InvariantSuite(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}
