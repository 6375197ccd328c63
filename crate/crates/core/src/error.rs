use thiserror::Error;

use crate::manifold::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("trajectory left the working region near {at:?} after parameter {param:.6}")]
    LeftWorkingRegion { at: Point, param: f64 },

    #[error(
        "geodesic solver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("points {distance:.6} apart exceed the uniqueness bound {bound:.6}")]
    OutsideUniqueness { distance: f64, bound: f64 },

    #[error("rebalance of petal {petal} failed: {reason}")]
    Rebalance { petal: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input at `{path}`: {message}")]
    Invalid { path: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LeftWorkingRegion { .. }
                | Error::NoConvergence { .. }
                | Error::OutsideUniqueness { .. }
                | Error::Rebalance { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
