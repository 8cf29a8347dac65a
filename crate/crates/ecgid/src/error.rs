use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ecgid_core::Error),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: ecgid_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed CSV: {msg}", path.display())]
    MalformedCsv { path: PathBuf, msg: String },
    #[error("{}: {msg}", path.display())]
    BadFile { path: PathBuf, msg: String },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// 1 for usage errors (bad flags, names or parameter values), 2 for
    /// problems with the data.
    pub fn exit_code(&self) -> i32 {
        use ecgid_core::Error as C;
        match self {
            Error::Usage(_) => 1,
            Error::Core(C::InvalidHyperparameter(_) | C::InvalidConfig(_)) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, msg: impl std::fmt::Display) -> Self {
        Error::MalformedCsv {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        }
    }

    pub(crate) fn bad_file(path: &Path, msg: impl std::fmt::Display) -> Self {
        Error::BadFile {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        }
    }
}

/// Attaches a file name to core errors.
pub(crate) trait InFile<T> {
    fn in_file(self, path: &Path) -> Result<T>;
}

impl<T> InFile<T> for std::result::Result<T, ecgid_core::Error> {
    fn in_file(self, path: &Path) -> Result<T> {
        self.map_err(|source| Error::InFile {
            path: path.to_path_buf(),
            source,
        })
    }
}
