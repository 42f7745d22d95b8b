use std::path::PathBuf;

use thiserror::Error;

use crate::rules::BookType;

/// Coarse error class, used by front ends to pick exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Constraint,
    Infeasible,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("rules: {0}")]
    Rules(String),

    #[error("{field}: {message}")]
    Constraint { field: String, message: String },

    #[error("settings file has no fields")]
    NoFields,

    #[error("empty manuscript")]
    EmptyManuscript,

    #[error("image '{0}' not found")]
    ImageNotFound(String),

    #[error("image '{name}' unreadable: {message}")]
    ImageUnreadable { name: String, message: String },

    #[error("no title source")]
    NoTitleSource,

    #[error("no pairing eligible for book type {0}")]
    NoPairing(BookType),

    #[error("font: {0}")]
    Font(String),

    #[error("non-positive text block: {0} mm")]
    NonPositiveBlock(f64),

    #[error("need at least two designs, got {0}")]
    TooFewDesigns(usize),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. }
            | Error::Rules(_)
            | Error::NoFields
            | Error::EmptyManuscript
            | Error::NoTitleSource
            | Error::Font(_) => ErrorClass::Parse,
            Error::Constraint { .. } | Error::NoPairing(_) | Error::TooFewDesigns(_) => ErrorClass::Constraint,
            Error::NonPositiveBlock(_) | Error::Infeasible(_) => ErrorClass::Infeasible,
            Error::ImageNotFound(_) | Error::ImageUnreadable { .. } | Error::Io { .. } => {
                ErrorClass::Io
            }
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn constraint(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Constraint {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
