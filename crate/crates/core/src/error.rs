use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not symmetric positive definite (Cholesky pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("matrix is singular (zero pivot at column {pivot})")]
    SingularMatrix { pivot: usize },

    #[error("zero diagonal pivot at row {row}")]
    ZeroPivot { row: usize },

    #[error("Krylov breakdown at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("Newton failed to converge after {iterations} iterations (residual norm {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("element {element} inverted (det F = {det:e})")]
    ElementInversion { element: usize, det: f64 },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("continuation failed at t = {t}: {source}")]
    ContinuationFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("reduced Jacobian is rank deficient (sigma_min = {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("basis layout hash {found} does not match problem layout {expected}")]
    LayoutMismatch { expected: String, found: String },

    #[error("preconditioner: {0}")]
    Preconditioner(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
