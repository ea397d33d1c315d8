use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error(transparent)]
    Numerical(#[from] shearmix_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("acceptance failure: {0}")]
    Acceptance(String),
}

impl LabError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }

    /// Process exit code: 1 acceptance failure, 2 usage (including arguments the numerics
    /// reject up front), 3 numerical or IO failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Acceptance(_) => 1,
            Self::Usage(_) | Self::Config { .. } | Self::Numerical(shearmix_core::Error::InvalidArgument(_)) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(LabError::Acceptance("AC-3".into()).exit_code(), 1);
        assert_eq!(LabError::Usage("x".into()).exit_code(), 2);
        assert_eq!(LabError::from(shearmix_core::Error::InvalidArgument("dt".into())).exit_code(), 2);
        assert_eq!(LabError::from(shearmix_core::Error::NoConvergence("rqi".into())).exit_code(), 3);
    }
}
