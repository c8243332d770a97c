use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped by how the CLI reports them: parse/format problems,
/// numerical failures, and refusals of over-cap requests.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("index {index} out of range for {limit} modes")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("refusing {what}: {requested} exceeds cap {cap}")]
    CapExceeded { what: String, requested: String, cap: String },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("non-uniform grid at point {index}")]
    NonUniformGrid { index: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge: best residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("state is not an eigenstate (residual {residual:e} > {tolerance:e})")]
    NotEigenstate { residual: f64, tolerance: f64 },

    #[error("wavepacket leaked to the grid boundary: {probability:e} at t = {time}")]
    BoundaryLeak { probability: f64, time: f64 },

    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cannot read {}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn parse(line: impl Into<Option<usize>>, message: impl Into<String>) -> Self {
        Error::Parse { line: line.into(), message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    /// Process exit status the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::Io(_) | Error::File { .. } => 2,
            Error::CapExceeded { .. } => 4,
            _ => 3,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::QubitMismatch { .. } => "qubit_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotNormalized { .. } => "not_normalized",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::NotPowerOfTwo(_) => "not_power_of_two",
            Error::NonUniformGrid { .. } => "non_uniform_grid",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NotEigenstate { .. } => "not_eigenstate",
            Error::BoundaryLeak { .. } => "boundary_leak",
            Error::Parse { .. } => "parse",
            Error::Invalid(_) => "invalid_input",
            Error::Io(_) | Error::File { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// `fs::read_to_string` with the path in the error.
pub fn read_text(path: impl AsRef<std::path::Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })
}
