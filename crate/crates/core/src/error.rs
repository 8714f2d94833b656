use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error(
        "second moment is singular (smallest eigenvalue {smallest:e}, largest {largest:e}); \
         use ols_fit for the minimum-norm solution"
    )]
    Singular { smallest: f64, largest: f64 },

    #[error(
        "eigen-solver failed to converge on a {dim}x{dim} matrix \
         (frobenius norm {frobenius:e}, trace {trace:e}, max |entry| {max_abs:e})"
    )]
    EigenFailure {
        dim: usize,
        frobenius: f64,
        trace: f64,
        max_abs: f64,
    },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    NotPositiveSemidefinite { eigenvalue: f64, tolerance: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
