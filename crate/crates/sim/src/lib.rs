//! Simulation harness for the `rcrt` library: parameter sweeps, separation
//! probability tables, the worked examples and the oracle agreement suite.

pub mod config;
pub mod demo;
pub mod format;
pub mod oracle_check;
pub mod prob;
pub mod sweep;

use rcrt::RcrtError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{}{field}: {message}", line.map_or(String::new(), |l| format!("line {l}: ")))]
    Config {
        line: Option<usize>,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] RcrtError),
    /// A worked example or oracle comparison disagreed.
    #[error("mismatch: {0}")]
    Mismatch(String),
}

impl SimError {
    /// Process exit code: `2` for mismatches, `1` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Mismatch(_) => 2,
            _ => 1,
        }
    }
}
