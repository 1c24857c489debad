use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(
        "dataset has {0} classes; a binary game needs exactly 2 (decompose multi-class data first)"
    )]
    NotBinary(usize),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("brute-force enumeration refused: n = {n} exceeds the cap of {cap} points")]
    CapExceeded { n: usize, cap: usize },
    #[error("game is not unweighted: {0}")]
    NotUnweighted(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("time budget of {0} s exceeded")]
    Timeout(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::EmptyDataset | Error::NotBinary(_) | Error::NonFinite(_) => "data",
            Error::InvalidParameter(_) | Error::LengthMismatch { .. } => "config",
            Error::CapExceeded { .. } => "cap",
            Error::NotUnweighted(_) => "engine",
            Error::Csv(e) if e.is_io_error() => "io",
            Error::Parse { .. } | Error::Format { .. } | Error::Csv(_) | Error::Json(_) => "parse",
            Error::Timeout(_) => "timeout",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code associated with [`Error::category`].
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "data" => 3,
            "config" => 4,
            "cap" => 5,
            "engine" => 6,
            "parse" => 7,
            "timeout" => 8,
            "io" => 9,
            _ => 1,
        }
    }
}
