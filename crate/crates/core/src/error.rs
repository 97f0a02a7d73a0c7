use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A wealth level or parameter falls outside a utility family's valid domain.
    #[error("{0}")]
    Domain(String),

    /// An inversion target lies outside the range of the utility function.
    #[error("{0}")]
    Range(String),

    #[error("{0}")]
    Convergence(String),

    /// The input carries no curvature or correlation information (zero variance, riskless asset).
    #[error("{0}")]
    Degenerate(String),

    #[error("{0}")]
    InsufficientData(String),

    #[error("{0}")]
    Alignment(String),

    #[error("{0}")]
    NoInteriorOptimum(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{0}")]
    Schema(String),

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Invariant(String),
}

impl Error {
    /// Short machine-readable code used in `ERROR <code>: <message>` lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Range(_) => "range",
            Error::Convergence(_) => "convergence",
            Error::Degenerate(_) => "degenerate",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Alignment(_) => "alignment",
            Error::NoInteriorOptimum(_) => "no_interior_optimum",
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::Validation(_) => "validation",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Invariant(_) => "invariant",
        }
    }

    /// Process exit status: 1 input/validation, 2 numerical degeneracy, 3 internal invariant breach.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::Validation(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Alignment(_)
            | Error::InsufficientData(_) => 1,
            Error::Domain(_)
            | Error::Range(_)
            | Error::Convergence(_)
            | Error::Degenerate(_)
            | Error::NoInteriorOptimum(_) => 2,
            Error::Invariant(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
