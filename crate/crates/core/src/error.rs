use thiserror::Error;

use crate::network::ValidationReport;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node `{node}` is not incident to edge {edge}")]
    NotIncident { edge: String, node: String },

    #[error("parallel edges between `{0}` and `{1}` are not supported by the admittance assembly")]
    ParallelEdges(String, String),

    #[error("singular matrix: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("CFL violation: courant number {courant} exceeds 1")]
    CflViolation { courant: f64 },

    #[error("edge {edge} has {cells} cells; at least {required} are required")]
    TooFewCells {
        edge: usize,
        cells: usize,
        required: usize,
    },

    #[error("invalid network:\n{0}")]
    InvalidNetwork(ValidationReport),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("I/O error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. } | Error::CflViolation { .. }
        )
    }

    /// Process exit code: 1 for configuration/validation errors, 2 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
