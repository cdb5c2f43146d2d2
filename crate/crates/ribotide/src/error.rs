use std::path::PathBuf;

/// Failure of a command, mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad flag, configuration key or value.
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: ribotide_core::Error,
    },
    /// Some rows of a table could not be computed; the table was still
    /// written with `NA` in their place.
    #[error("{failed} of {total} points failed; first: {first}")]
    PartialFailure { failed: usize, total: usize, first: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn numeric(context: impl Into<String>, source: ribotide_core::Error) -> Self {
        RunError::Numeric {
            context: context.into(),
            source,
        }
    }

    /// 2 usage, 3 numeric failure, 4 I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Numeric { .. } | RunError::PartialFailure { .. } => 3,
            RunError::Io { .. } => 4,
        }
    }
}
