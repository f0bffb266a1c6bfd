use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Walk(#[from] primewalk_core::Error),
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 I/O, 3 checkpoint mismatch.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Walk(_) => 1,
            Self::Io { .. } => 2,
            Self::Checkpoint(CheckpointError::Io(_)) => 2,
            Self::Checkpoint(_) => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint is truncated or has trailing bytes")]
    Truncated,
    #[error("checkpoint checksum mismatch; the file is corrupt")]
    Checksum,
    #[error("checkpoint was written for a different run configuration ({0})")]
    ConfigMismatch(String),
    #[error("checkpoint content is inconsistent: {0}")]
    Inconsistent(String),
}
