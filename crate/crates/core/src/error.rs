//! Crate-wide error type. Variants mirror the ways a run can go wrong:
//! bad math-domain inputs, invalid configuration, a regression without
//! information in it, lookups off the mesh, and I/O or parse failures when
//! reading and writing run files.

use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum Error {
    /// A mathematical precondition was violated, e.g. a non-positive
    /// half-life or an autoregressive weight outside (0, 1) where
    /// stationarity is required.
    Domain(String),
    /// A configuration or constructor argument was rejected. Names the field.
    Validation { field: &'static str, message: String },
    /// The regressor has zero variance, so no slope can be identified.
    DegenerateDesign,
    /// Fewer observations than the operation needs.
    InsufficientData { needed: usize, got: usize },
    /// The requested profit-taking level is not one of the mesh levels.
    NotOnMesh { value: f64 },
    /// No mesh node satisfies the requested stop-loss cap.
    NoEligibleNodes { sl_max: f64 },
    /// Malformed input file content, with the 1-based line number.
    Parse { line: usize, message: String },
    /// Filesystem failure while reading or writing a run file.
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "{msg}"),
            Error::Validation { field, message } => write!(f, "invalid {field}: {message}"),
            Error::DegenerateDesign => {
                write!(f, "degenerate design: the regressor has zero variance")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} transitions, got {got}")
            }
            Error::NotOnMesh { value } => {
                write!(f, "profit-taking level {value} is not on the mesh")
            }
            Error::NoEligibleNodes { sl_max } => {
                write!(f, "no mesh node has a stop-loss within {sl_max}")
            }
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
