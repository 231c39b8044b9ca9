use thiserror::Error;

/// Errors raised by the numerical core and the scenario layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("operator is not hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("density is not faithful (min eigenvalue {min_eigenvalue:.3e})")]
    NotFaithful { min_eigenvalue: f64 },

    #[error("invalid kernel at row {row}: {reason}")]
    InvalidKernel { row: usize, reason: String },

    #[error("map leaves the block algebra (off-block mass {deviation:.3e})")]
    LeavesAlgebra { deviation: f64 },

    #[error("maps act on different algebras")]
    AlgebraMismatch,

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("budget infeasible: {0}")]
    BudgetInfeasible(String),

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
