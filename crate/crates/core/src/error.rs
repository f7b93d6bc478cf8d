use thiserror::Error;

/// Errors raised by geometric constructions, samplers and pipelines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("degenerate simplex: |det| = {det:e} below threshold {threshold:e}")]
    DegenerateSimplex { det: f64, threshold: f64 },

    #[error("polar is unbounded: origin is not strictly interior (margin {margin:e})")]
    PolarUnbounded { margin: f64 },

    #[error("not a convex body: {0}")]
    NotABody(String),

    #[error("no exact volume available for {0}")]
    NoExactVolume(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("ill-conditioned covariance: eigenvalue ratio {ratio:e}")]
    IllConditioned { ratio: f64 },

    #[error("exact sampler not available for {0}")]
    NoExactSampler(&'static str),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("construction failed: no certified trial out of {trials}")]
    ConstructionFailed { trials: usize },

    #[error("internal logic error: {0}")]
    Internal(String),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("body spec: {0}")]
    Spec(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
