use num_complex::Complex64;
use thiserror::Error;

use crate::optimize::SearchResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    /// Two eigenvalues (and eigenvectors) have coalesced or nearly so.
    #[error("exceptional point: eigenvalues {0:.6e} and {1:.6e} are (nearly) degenerate")]
    ExceptionalPoint(Complex64, Complex64),

    /// A non-decaying mode overlaps an emission channel.
    #[error("divergent current: non-decaying mode {mode} radiates with overlap {overlap:e}")]
    DivergentCurrent { mode: usize, overlap: f64 },

    #[error("chirality undefined: state does not radiate")]
    UndefinedChirality,

    #[error("integration error: {0}")]
    Integration(String),

    #[error("step-halving did not converge after {depth} refinements (last change {change:e})")]
    Convergence { depth: u32, change: f64 },

    #[error("leakage out of the logical subspace: {0:e}")]
    Leakage(f64),

    #[error("target state unreachable by the gate family (residual {0:e})")]
    Unreachable(f64),

    #[error("search did not find an acceptable point (best objective {:e})", .0.objective)]
    NotFound(Box<SearchResult>),
}
