//! Config-driven experiment runner for the excited-state solver: the `run`,
//! `gradcheck`, `compare-baseline`, and `audit` subcommands as a library, so
//! integration tests drive the exact same code paths as the binary.

pub mod audit;
pub mod baseline;
pub mod checkpoint;
pub mod config;
pub mod gradcheck;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit code: 2 config, 3 numerical, 1 io/other.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}
