//! Small enclosing simplices by polar duality: a large centered simplex
//! `T ⊂ K°` gives `S = T° ⊇ K`, and `vol(S)·vol(T)` is the same for every
//! centered simplex.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bodies::{simplex_contains_body, AffineMap, ConvexBody, Simplex};
use crate::centered::{run_trials_with_l_hat, CenterPolicy, TrialOptions, TrialSummary};
use crate::error::{GeomError, Result};
use crate::isotropy::{
    default_sample_count, estimate_moments, isotropic_transform, monte_carlo_volume, IsotropyOptions,
};
use crate::numeric::{ln_factorial, mahler_centered_simplex};
use crate::sampling::SamplerConfig;

/// Damping of the centering iteration.
pub const CENTER_STEP: f64 = 0.5;
/// Stop when the preconditioned polar barycenter is below this times the
/// body scale.
pub const CENTER_TOL: f64 = 1e-3;
pub const CENTER_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarCentering {
    /// `K − translation` has its polar barycenter near the origin.
    pub translation: DVector<f64>,
    /// `|P·bar((K−x)°)|` at the returned point, `P` the preconditioner.
    pub residual: f64,
    /// `|bar((K−x)°)|` at the returned point.
    pub polar_barycenter_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn polar_barycenter(k: &ConvexBody, sampler: &SamplerConfig, seed: u64) -> Result<(DVector<f64>, f64)> {
    let polar = Arc::new(k.polar()?);
    let n = k.dim();
    let m = estimate_moments(&polar, sampler, seed, default_sample_count(n))?;
    // polar volume drives backtracking; a Monte Carlo value is fine there
    let vol = match polar.exact_volume() {
        Ok(v) => v,
        Err(_) => monte_carlo_volume(&polar, seed, 200_000)?.0,
    };
    Ok((m.barycenter, vol))
}

/// Damped preconditioned iteration `x ← x − ½·P·bar((K−x)°)` toward the
/// point where the polar body is centered, starting from the barycenter of
/// `K`. `P = (n+2)·Cov(K)` makes the step exact for ellipsoids. Steps that
/// increase `vol((K−x)°)` are halved.
pub fn center_for_polar(k: &ConvexBody, iters: usize, sampler: &SamplerConfig, seed: u64) -> Result<PolarCentering> {
    let n = k.dim();
    let body = Arc::new(k.clone());
    let moments = estimate_moments(&body, sampler, seed, default_sample_count(n))?;
    let precond = &moments.covariance * (n + 2) as f64;
    let tol = CENTER_TOL * k.scale();

    let mut x = moments.barycenter.clone();
    let (mut bar, mut vol) = polar_barycenter(&k.translate(&-&x)?, sampler, seed)?;
    let mut step = &precond * &bar;
    let mut iterations = 0;
    while step.norm() > tol && iterations < iters {
        iterations += 1;
        let mut t = CENTER_STEP;
        let mut accepted = false;
        for _ in 0..20 {
            let candidate = &x - &step * t;
            if let Ok((b, v)) = k.translate(&-&candidate).and_then(|kc| polar_barycenter(&kc, sampler, seed)) {
                if v <= vol * (1.0 + 1e-12) {
                    x = candidate;
                    bar = b;
                    vol = v;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        step = &precond * &bar;
    }
    let residual = step.norm();
    Ok(PolarCentering {
        translation: x,
        residual,
        polar_barycenter_norm: bar.norm(),
        iterations,
        converged: residual <= tol,
    })
}

/// Both sides of `vol(S)/vol(K) = [vol(S)vol(T)/(vol(K)vol(K°))]·[vol(K°)/vol(T)]`
/// for `S = T°`: the left from direct volumes, the right with the closed-form
/// Mahler product of a centered simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityAudit {
    pub left: f64,
    pub right: f64,
    pub residual: f64,
    /// `(n+1)^{n+1}/(n!)² / (vol(K)·vol(K°))`.
    pub mahler_factor: f64,
    pub polar_volume: f64,
    pub polar_volume_exact: bool,
}

pub fn duality_volume_identity(t: &Simplex, k: &ConvexBody, seed: u64) -> Result<DualityAudit> {
    let n = t.dim();
    let s = t.polar()?;
    let vol_k = body_volume(k, seed)?.0;
    let polar = k.polar()?;
    let (vol_polar, polar_volume_exact) = body_volume(&polar, seed ^ 1)?;
    let left = s.volume() / vol_k;
    let mahler_factor = mahler_centered_simplex(n) / (vol_k * vol_polar);
    let right = mahler_factor * (vol_polar / t.volume());
    Ok(DualityAudit {
        left,
        right,
        residual: (left - right).abs() / left.abs().max(right.abs()),
        mahler_factor,
        polar_volume: vol_polar,
        polar_volume_exact,
    })
}

fn body_volume(k: &ConvexBody, seed: u64) -> Result<(f64, bool)> {
    match k.exact_volume() {
        Ok(v) => Ok((v, true)),
        Err(_) => Ok((monte_carlo_volume(k, seed, 1_000_000)?.0, false)),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EncloseOptions {
    pub trials: usize,
    pub policy: CenterPolicy,
    pub sampler: SamplerConfig,
    pub seed: u64,
    pub center_iters: usize,
}

impl Default for EncloseOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            policy: CenterPolicy::default(),
            sampler: SamplerConfig::default(),
            seed: 0,
            center_iters: CENTER_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosingResult {
    /// Enclosing simplex in the original coordinates.
    pub enclosing: Simplex,
    pub contains: bool,
    /// `vol(S)/vol(K)`.
    pub ratio: f64,
    /// `ratio^{1/n}/√n`.
    pub normalized: f64,
    pub trials_used: usize,
    pub translation: DVector<f64>,
    pub centering: PolarCentering,
    /// Centered simplex inside the polar of the translated body.
    pub inner: Simplex,
    pub l_hat: f64,
    pub body_volume: f64,
    pub body_volume_exact: bool,
    pub simplex_volume: f64,
    pub audit: DualityAudit,
    pub trials: TrialSummary,
}

/// Runs the polar-duality pipeline on `k`.
pub fn enclose(k: &ConvexBody, options: &EncloseOptions) -> Result<EnclosingResult> {
    let n = k.dim();
    let centering = center_for_polar(k, options.center_iters, &options.sampler, options.seed)?;
    let x = centering.translation.clone();
    let shifted = k.translate(&-&x)?;
    let polar = Arc::new(shifted.polar()?);

    let iso = IsotropyOptions { sampler: options.sampler, seed: options.seed, samples: None };
    let moments = estimate_moments(&polar, &options.sampler, options.seed, default_sample_count(n))?;
    let model = isotropic_transform(&polar, &moments, &iso)?;
    // Only the linear part is applied: its inverse keeps a centered simplex
    // centered, and the image is isotropic up to the small residual shift.
    let linear = AffineMap::linear_only(model.map.linear().clone())?;
    let image = Arc::new(polar.transform(&linear)?);

    let trial_opts =
        TrialOptions { trials: options.trials, policy: options.policy, sampler: options.sampler, seed: options.seed };
    let run = run_trials_with_l_hat(&image, model.l_hat, &trial_opts)?;
    let best = run.best.ok_or(GeomError::ConstructionFailed { trials: options.trials })?;
    let inner = best.result.transform(&linear.inverse());

    let s = inner.polar()?;
    let contains = simplex_contains_body(&s, &shifted)?;
    if !contains {
        return Err(GeomError::Internal("polar simplex fails to contain the body".into()));
    }
    let (body_volume, body_volume_exact) = body_volume(k, options.seed)?;
    let simplex_volume = s.volume();
    let ratio = simplex_volume / body_volume;
    let normalized = normalized_ratio(ratio, n);
    let audit = duality_volume_identity(&inner, &shifted, options.seed)?;

    Ok(EnclosingResult {
        enclosing: s.translate(&x),
        contains,
        ratio,
        normalized,
        trials_used: options.trials,
        translation: x,
        centering,
        inner,
        l_hat: model.l_hat,
        body_volume,
        body_volume_exact,
        simplex_volume,
        audit,
        trials: run.summary,
    })
}

/// `ratio^{1/n}/√n`.
pub fn normalized_ratio(ratio: f64, n: usize) -> f64 {
    (ratio.ln() / n as f64 - 0.5 * (n as f64).ln()).exp()
}

/// n-th roots of the classical enclosing-simplex volume bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// `n^{(n−1)/n}`.
    pub chakerian: f64,
    /// `√n·ln n`, constant suppressed.
    pub gh: f64,
    /// `d·√n` for an empirical constant `d`.
    pub polar_pipeline: Option<f64>,
}

pub fn baseline_bounds(n: usize, d: Option<f64>) -> Result<Baselines> {
    if n < 2 {
        return Err(GeomError::Spec("baselines need n ≥ 2".into()));
    }
    let nf = n as f64;
    Ok(Baselines {
        chakerian: nf.powf((nf - 1.0) / nf),
        gh: nf.sqrt() * nf.ln(),
        polar_pipeline: d.map(|d| d * nf.sqrt()),
    })
}

/// `(n+1)^{(n+1)/2}·n^{n/2}/n!`: volume of the regular simplex around the
/// unit ball, in log form.
pub fn ln_regular_simplex_around_ball(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * (nf + 1.0) * (nf + 1.0).ln() + 0.5 * nf * nf.ln() - ln_factorial(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ln_unit_ball_volume;
    use nalgebra::DMatrix;

    fn quick() -> EncloseOptions {
        EncloseOptions { trials: 200, seed: 5, ..EncloseOptions::default() }
    }

    #[test]
    fn symmetric_bodies_need_no_translation() {
        for k in [ConvexBody::ball(3, 1.0).unwrap(), ConvexBody::cube(3, 0.5, true).unwrap()] {
            let c = center_for_polar(&k, 50, &SamplerConfig::default(), 0).unwrap();
            assert!(c.translation.norm() < 1e-12);
            assert!(c.converged);
        }
    }

    #[test]
    fn centered_simplex_needs_no_translation() {
        let k = ConvexBody::simplex(Simplex::standard_centered(4));
        let c = center_for_polar(&k, 50, &SamplerConfig::default(), 0).unwrap();
        assert!(c.translation.norm() < 1e-12);
    }

    #[test]
    fn translated_ball_is_recovered() {
        let center = DVector::from_vec(vec![0.3, -0.2, 0.5]);
        let k = ConvexBody::ball_at(center.clone(), 1.0).unwrap();
        let c = center_for_polar(&k, 50, &SamplerConfig::default(), 0).unwrap();
        assert!((c.translation - center).norm() < 1e-3);
    }

    #[test]
    fn off_center_simplex_lands_on_its_barycenter() {
        // translate the standard centered simplex; the fixed point is its
        // barycenter, which is also the starting point
        let shift = DVector::from_vec(vec![0.2, 0.1, -0.4]);
        let k = ConvexBody::simplex(Simplex::standard_centered(3).translate(&shift));
        let c = center_for_polar(&k, 50, &SamplerConfig::default(), 0).unwrap();
        assert!((c.translation - shift).norm() < 1e-10);
    }

    #[test]
    fn asymmetric_polytope_converges() {
        let k = ConvexBody::vpolytope(vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![3.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![1.0, 1.5]),
        ])
        .unwrap();
        let c = center_for_polar(&k, 50, &SamplerConfig::default(), 0).unwrap();
        assert!(c.converged, "{c:?}");
    }

    #[test]
    fn ball_pipeline() {
        for n in 2..=4 {
            let r = enclose(&ConvexBody::ball(n, 1.0).unwrap(), &quick()).unwrap();
            assert!(r.contains);
            assert!(r.audit.residual < 1e-9);
            let reference = (ln_regular_simplex_around_ball(n) - ln_unit_ball_volume(n)).exp();
            assert!(r.ratio >= reference * (1.0 - 1e-9));
            // the inner simplex is centered
            let sum = r.inner.vertices().iter().fold(DVector::zeros(n), |a, v| a + v);
            assert!(sum.norm() <= 1e-9 * r.inner.scale());
        }
    }

    #[test]
    fn enclosing_contains_translated_bodies() {
        let shape = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let k = ConvexBody::ellipsoid(shape, DVector::from_vec(vec![5.0, -3.0])).unwrap();
        let r = enclose(&k, &quick()).unwrap();
        assert!(simplex_contains_body(&r.enclosing, &k).unwrap());
        let cube = ConvexBody::unit_cube(3).unwrap();
        let r = enclose(&cube, &quick()).unwrap();
        assert!(simplex_contains_body(&r.enclosing, &cube).unwrap());
        assert!(r.ratio >= 1.0);
    }

    #[test]
    fn duality_audit_on_regular_simplex_in_ball() {
        for n in 2..=6 {
            let ball = ConvexBody::ball(n, 1.0).unwrap();
            let t = Simplex::regular(n, 1.0);
            let a = duality_volume_identity(&t, &ball, 0).unwrap();
            assert!(a.residual < 1e-12);
            let mahler_ball = (2.0 * ln_unit_ball_volume(n)).exp();
            assert!((a.mahler_factor - mahler_centered_simplex(n) / mahler_ball).abs() < 1e-9 * a.mahler_factor);
            // homogeneity: shrinking T by t multiplies both sides by t^{-n}
            let small = t.scaled_about(&DVector::zeros(n), 0.5);
            let b = duality_volume_identity(&small, &ball, 0).unwrap();
            let f = 2f64.powi(n as i32);
            assert!((b.left / a.left / f - 1.0).abs() < 1e-12 && (b.right / a.right / f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn baselines() {
        let b = baseline_bounds(2, None).unwrap();
        assert!((b.chakerian - 2f64.sqrt()).abs() < 1e-15);
        let b = baseline_bounds(10, Some(0.9)).unwrap();
        assert!((b.chakerian - 10f64.powf(0.9)).abs() < 1e-12);
        assert!((b.chakerian - 7.943).abs() < 1e-3 && (b.gh - 7.281).abs() < 1e-3);
        let big = baseline_bounds(10_000, Some(1.0)).unwrap();
        assert!(big.polar_pipeline.unwrap() < big.gh && big.gh < big.chakerian);
        assert!(baseline_bounds(1, None).is_err());
    }
}
