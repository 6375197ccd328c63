//! Curve-shortening flow on spaces of geodesic flowers and cages over
//! two-dimensional Riemannian manifolds.

pub mod ends;
pub mod error;
pub mod fill;
pub mod flow;
pub mod manifold;
pub mod nets;
pub mod scenario;
pub mod svg;

pub use error::{Error, Result};
pub use manifold::{Manifold, Point, TangentVector};
