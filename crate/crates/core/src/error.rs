use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("root bracketing failed for order {order} on [{lo}, {hi}]")]
    RootFinding { order: usize, lo: f64, hi: f64 },

    #[error("boundary resolution too coarse: {reason}")]
    Resolution { reason: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("missing data: {0}")]
    Missing(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("size cap exceeded: {what} ({size} > {cap})")]
    SizeCap { what: &'static str, size: usize, cap: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn arg(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { field, reason: reason.into() }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument { .. } => "invalid_argument",
            Error::RootFinding { .. } => "root_finding",
            Error::Resolution { .. } => "resolution",
            Error::Shape { .. } => "shape",
            Error::Missing(_) => "missing",
            Error::Solver(_) => "solver",
            Error::SizeCap { .. } => "size_cap",
            Error::Empty(_) => "empty",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// The offending field, when the error names one.
    pub fn field(&self) -> Option<String> {
        match self {
            Error::InvalidArgument { field, .. } => Some((*field).to_string()),
            Error::Config { field, .. } => Some(field.clone()),
            _ => None,
        }
    }

    /// Process exit code: 2 for bad input or configuration, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument { .. }
            | Error::Resolution { .. }
            | Error::Shape { .. }
            | Error::Missing(_)
            | Error::Empty(_)
            | Error::Config { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::RootFinding { .. } | Error::Solver(_) | Error::SizeCap { .. } => 3,
        }
    }
}
