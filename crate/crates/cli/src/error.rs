use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Runtime(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Core {
        path: PathBuf,
        source: maxtimes::Error,
    },

    #[error(transparent)]
    Lib(#[from] maxtimes::Error),
}

impl CliError {
    /// 1 usage, 2 data, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) | Self::Io { .. } => 2,
            Self::Runtime(_) => 3,
            Self::Core { source, .. } | Self::Lib(source) => lib_exit_code(source),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn at(path: &Path, source: maxtimes::Error) -> Self {
        Self::Core {
            path: path.to_owned(),
            source,
        }
    }
}

fn lib_exit_code(e: &maxtimes::Error) -> i32 {
    use maxtimes::Error as E;
    match e {
        E::InvalidParameter(_) => 1,
        E::Parse { .. }
        | E::InvalidValue { .. }
        | E::InvalidLength { .. }
        | E::MissingEntries(_)
        | E::DimensionMismatch { .. }
        | E::Precondition(_)
        | E::Io(_)
        | E::Csv(_) => 2,
        E::Undefined(_) | E::IndexOutOfRange { .. } => 3,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
