use thiserror::Error;

#[derive(Debug, Error)]
pub enum QveError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("a + b(e,e) deviates from e by {deviation:e} (tolerance {tol:e})")]
    NotStochastic { deviation: f64, tol: f64 },

    #[error("singular linear system (pivot {pivot:e} below threshold {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("matrix is not irreducible: {0}")]
    Irreducibility(String),

    #[error("Perron normalization failed: {0}")]
    Normalization(String),

    #[error("degenerate projection in Perron Jacobian: {0}")]
    DegenerateProjection(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Parse(String),
}

impl QveError {
    /// True for errors that signal a solver failing to reach a valid limit,
    /// as opposed to malformed input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            QveError::NoConvergence(_)
                | QveError::Numeric(_)
                | QveError::Singular { .. }
                | QveError::Normalization(_)
                | QveError::DegenerateProjection(_)
                | QveError::Irreducibility(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, QveError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QveError::DimensionMismatch { expected, found });
    }
    Ok(())
}
