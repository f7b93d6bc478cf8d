//! Randomized construction of large simplices with barycenter at the origin
//! inside convex bodies, and small enclosing simplices obtained from them by
//! polar duality.
//!
//! The crate is organized bottom-up:
//!
//! - [`bodies`]: convex-body representations with exact volumes, moments,
//!   support functions, polars and simplex geometry.
//! - [`sampling`]: exact uniform samplers and a hit-and-run chain.
//! - [`isotropy`]: isotropic normalization and the isotropic constant.
//! - [`centered`]: random centered simplices inside isotropic bodies.
//! - [`enclosing`]: enclosing simplices through the polar body.
//! - [`harness`]: closed-form references, the planar triangle oracle,
//!   reports and sweeps.

pub mod bodies;
pub mod centered;
pub mod enclosing;
pub mod error;
pub mod harness;
pub mod isotropy;
pub mod numeric;
pub mod sampling;

pub use bodies::{AffineMap, BodyKind, BodySpec, ConvexBody, Halfspace, Simplex};
pub use error::{GeomError, Result};
