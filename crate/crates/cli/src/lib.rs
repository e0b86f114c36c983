//! Command-line front end: dataset ingestion, estimation reports, the Monte
//! Carlo study, table emission and the bundled real-data example.

pub mod commands;
pub mod dataset;
pub mod realdata;
pub mod report;

use ovl_core::OvlError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] OvlError),
    #[error("{name}:{line}:{col}: {msg}")]
    Data {
        name: String,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for domain and estimation errors, 2 for bad usage or configuration,
    /// 3 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(OvlError::Config(_)) | CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Data { .. } => 1,
            CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
