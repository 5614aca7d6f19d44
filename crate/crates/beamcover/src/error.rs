//! Library error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An angle left the domain a formula is defined on.
    #[error("{name} = {value_deg} deg is outside [{min_deg}, {max_deg}] deg")]
    AngleOutOfRange {
        name: &'static str,
        value_deg: f64,
        min_deg: f64,
        max_deg: f64,
    },

    #[error("degenerate manifold: element {index} has zero magnitude")]
    DegenerateManifold { index: usize },

    #[error("dimension mismatch: manifold has {manifold} elements, weights have {weights}")]
    DimensionMismatch { manifold: usize, weights: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Greedy cover found a grid point no candidate contains.
    #[error("no candidate covers grid point {0}")]
    Uncoverable(String),

    #[error("empty codebook")]
    EmptyCodebook,

    #[error("codebook does not match geometry: {0}")]
    GeometryMismatch(String),

    #[error("root search failed: {0}")]
    RootSearch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
