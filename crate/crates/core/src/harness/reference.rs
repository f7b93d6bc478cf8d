//! Closed-form reference values: the regular simplex around the ball and
//! the corner simplex around the cube.

use serde::{Deserialize, Serialize};

use crate::bodies::{simplex_contains_body, ConvexBody, Simplex};
use crate::enclosing::ln_regular_simplex_around_ball;
use crate::error::{GeomError, Result};
use crate::numeric::{ln_factorial, ln_unit_ball_volume};

/// Volume ratio of the minimal simplex around a unit parallelepiped in
/// dimension 3, reported as a data point.
pub const PARALLELEPIPED_RATIO_3D: f64 = 4.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallReference {
    pub n: usize,
    /// Regular simplex circumscribed about the unit ball.
    pub vol_simplex: f64,
    pub vol_ball: f64,
    /// `(vol_simplex/vol_ball)^{1/n}/√n`.
    pub normalized_ratio: f64,
}

pub fn reference_ball(n: usize) -> Result<BallReference> {
    if n == 0 {
        return Err(GeomError::Spec("dimension must be positive".into()));
    }
    let ln_s = ln_regular_simplex_around_ball(n);
    let ln_b = ln_unit_ball_volume(n);
    let nf = n as f64;
    Ok(BallReference {
        n,
        vol_simplex: ln_s.exp(),
        vol_ball: ln_b.exp(),
        normalized_ratio: ((ln_s - ln_b) / nf - 0.5 * nf.ln()).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeReference {
    pub n: usize,
    /// `n/(n!)^{1/n}`, the n-th root of the volume ratio (no `√n` factor).
    pub normalized_ratio_bound: f64,
    /// `S(0, n·e₁, …, n·eₙ) ⊇ [0,1]ⁿ` by support-function certification.
    pub certified: bool,
}

pub fn reference_cube(n: usize) -> Result<CubeReference> {
    if n == 0 {
        return Err(GeomError::Spec("dimension must be positive".into()));
    }
    let nf = n as f64;
    let bound = (nf.ln() - ln_factorial(n) / nf).exp();
    let certified = simplex_contains_body(&Simplex::corner(n, nf), &ConvexBody::unit_cube(n)?)?;
    Ok(CubeReference { n, normalized_ratio_bound: bound, certified })
}
