// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use ppliers_core::graph::SnapshotError;
use ppliers_core::trace::TraceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input file; the message cites `file:line`.
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
            CliError::UnknownUser(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn trace(path: &Path, err: TraceError) -> Self {
        match err {
            TraceError::Parse { line, message } => CliError::Parse(format!("{}:{line}: {message}", path.display())),
            TraceError::Io(e) => CliError::Other(anyhow::anyhow!("{}: {e}", path.display())),
        }
    }

    pub fn snapshot(path: &Path, err: SnapshotError) -> Self {
        let at = |line: usize| format!("{}:{line}", path.display());
        match err {
            SnapshotError::Parse { line, message } => CliError::Parse(format!("{}: {message}", at(line))),
            SnapshotError::Dangling { line, item } => {
                CliError::Parse(format!("{}: item `{item}` has tag records but no user record", at(line)))
            }
            SnapshotError::Io(e) => CliError::Other(anyhow::anyhow!("{}: {e}", path.display())),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
