use std::path::PathBuf;

use ctc_core::ensemble::EnsembleError;
use ctc_core::liouvillian::LiouvillianError;
use ctc_core::meanfield::MeanFieldError;
use ctc_core::sync::SyncError;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed file {path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{context}: {source}")]
    Context {
        context: String,
        source: Box<LabError>,
    },
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        LabError::Format {
            path: path.into(),
            msg: msg.to_string(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        LabError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 for invalid input, 3 for numerical failures,
    /// 4 for file problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            LabError::Numerical(_) => 3,
            LabError::Io { .. } | LabError::Format { .. } => 4,
            LabError::Context { source, .. } => source.exit_code(),
        }
    }
}

impl From<LiouvillianError> for LabError {
    fn from(e: LiouvillianError) -> Self {
        match e {
            LiouvillianError::InvalidParams(_)
            | LiouvillianError::Spin(_)
            | LiouvillianError::CapExceeded { .. }
            | LiouvillianError::InvalidState(_) => LabError::Validation(e.to_string()),
            _ => LabError::Numerical(e.to_string()),
        }
    }
}

impl From<MeanFieldError> for LabError {
    fn from(e: MeanFieldError) -> Self {
        match e {
            MeanFieldError::Ode(_) => LabError::Numerical(e.to_string()),
            _ => LabError::Validation(e.to_string()),
        }
    }
}

impl From<SyncError> for LabError {
    fn from(e: SyncError) -> Self {
        match e {
            SyncError::Ode(_) | SyncError::Escaped { .. } | SyncError::RenormUnderflow { .. } => {
                LabError::Numerical(e.to_string())
            }
            _ => LabError::Validation(e.to_string()),
        }
    }
}

impl From<EnsembleError> for LabError {
    fn from(e: EnsembleError) -> Self {
        LabError::Validation(e.to_string())
    }
}

impl From<ctc_core::spin::SpinError> for LabError {
    fn from(e: ctc_core::spin::SpinError) -> Self {
        LabError::Validation(e.to_string())
    }
}
