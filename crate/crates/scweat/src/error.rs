use std::fmt;
use std::path::Path;

use scweat_core::Error as CoreError;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Data,
    Capacity,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Capacity => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Data => "data",
            Kind::Capacity => "capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{msg}")]
pub struct AppError {
    pub kind: Kind,
    pub msg: String,
}

impl AppError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self { kind: Kind::Config, msg: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { kind: Kind::Data, msg: msg.into() }
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Self { kind: Kind::Capacity, msg: msg.into() }
    }

    /// Parse failure at a 1-based line of `path`.
    pub fn at_line(path: &Path, line: usize, msg: impl fmt::Display) -> Self {
        Self::data(format!("{}:{line}: {msg}", path.display()))
    }

    pub fn open(path: &Path, err: std::io::Error) -> Self {
        Self::config(format!("cannot open {}: {err}", path.display()))
    }

    pub fn read(path: &Path, err: impl fmt::Display) -> Self {
        Self::data(format!("cannot read {}: {err}", path.display()))
    }

    /// The single machine-parseable line printed on failure.
    pub fn line(&self) -> String {
        let msg = self.msg.replace(['\n', '\r'], " ");
        format!("error kind={} msg={:?}", self.kind.as_str(), msg)
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        let kind = match e {
            CoreError::Capacity(_) => Kind::Capacity,
            CoreError::InvalidParameter(_)
            | CoreError::AttributeTooSmall { .. }
            | CoreError::UnequalAttributes { .. } => Kind::Config,
            _ => Kind::Data,
        };
        Self { kind, msg: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
