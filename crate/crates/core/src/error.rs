use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The short-circuited pixel subsystem could not be solved reliably.
    #[error("singular pixel-port system (reciprocal condition number {rcond:.3e})")]
    SingularSystem { rcond: f64 },

    #[error("open-circuit pattern matrix is identically zero")]
    EmptyPattern,

    /// The coder radiates nothing inside the retained beamspace.
    #[error("coder yields a zero pattern coder{}", element.map(|e| format!(" at element {e}")).unwrap_or_default())]
    ZeroPattern { element: Option<usize> },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("channel matrix is identically zero")]
    ZeroChannel,

    #[error("unsupported Taylor order {order} (must be even, at least 2 and at most {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("power must be strictly positive (got {0})")]
    NonPositivePower(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible synthetic antenna spec: {0}")]
    InfeasibleSpec(String),

    /// Malformed dataset or configuration document.
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    /// Dataset parsed but its arrays disagree with the declared sizes.
    #[error("dimension error in {path}: {message}")]
    Dimension { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularSystem { .. }
            | Error::EmptyPattern
            | Error::ZeroPattern { .. }
            | Error::ZeroChannel
            | Error::DimensionMismatch { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
