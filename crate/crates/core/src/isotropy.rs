//! Isotropic normalization: volume one, barycenter at the origin and scalar
//! covariance `L²·I`, with `L` the isotropic constant.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{AffineMap, BodyKind, ConvexBody};
use crate::error::{GeomError, Result};
use crate::sampling::{sample_parallel, stream_rng, SamplerConfig};

/// Eigenvalue ratio below which a covariance is rejected.
pub const CONDITION_LIMIT: f64 = 1e-12;
/// Largest dimension in which a missing volume is estimated by rejection.
pub const MAX_MC_VOLUME_DIM: usize = 6;
/// Stream offset of the residual check, so it never reuses moment samples.
const RESIDUAL_STREAM: u64 = 1 << 40;

/// Default Monte Carlo budget `max(10⁴, 200·n²)`.
pub fn default_sample_count(n: usize) -> usize {
    (200 * n * n).max(10_000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub barycenter: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// 0 for closed-form moments.
    pub sample_count: usize,
}

impl Moments {
    pub fn is_exact(&self) -> bool {
        self.sample_count == 0
    }
}

/// Closed-form moments: balls, cubes, ellipsoids and simplices always,
/// polytopes through their hull triangulation when `polytopes` is set.
pub fn exact_moments(body: &ConvexBody, polytopes: bool) -> Option<Moments> {
    let closed_form = matches!(
        body.kind(),
        BodyKind::Ball { .. } | BodyKind::Cube { .. } | BodyKind::Ellipsoid { .. } | BodyKind::Simplex(_)
    );
    if !closed_form && !(polytopes && body.dim() <= crate::bodies::MAX_HULL_DIM) {
        return None;
    }
    let m = body.exact_moments().ok()?;
    Some(Moments { barycenter: m.barycenter, covariance: m.covariance, sample_count: 0 })
}

/// Sample mean and covariance of `count` uniform points.
pub fn monte_carlo_moments(
    body: &Arc<ConvexBody>,
    sampler: &SamplerConfig,
    seed: u64,
    count: usize,
) -> Result<Moments> {
    let n = body.dim();
    if count < 100 * n * n || count < 2 {
        return Err(GeomError::Sampler(format!("need at least {} samples, got {count}", 100 * n * n)));
    }
    let pts = sample_parallel(body, sampler, seed, 0, count)?;
    let (barycenter, covariance) = mean_and_covariance(&pts);
    Ok(Moments { barycenter, covariance, sample_count: count })
}

/// Closed forms where available (including polytope triangulation), else
/// Monte Carlo with `count` samples.
pub fn estimate_moments(
    body: &Arc<ConvexBody>,
    sampler: &SamplerConfig,
    seed: u64,
    count: usize,
) -> Result<Moments> {
    match exact_moments(body, true) {
        Some(m) => Ok(m),
        None => monte_carlo_moments(body, sampler, seed, count),
    }
}

pub fn mean_and_covariance(pts: &[DVector<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let n = pts[0].len();
    let count = pts.len() as f64;
    let mean = pts.iter().fold(DVector::zeros(n), |a, p| a + p) / count;
    let mut cov = DMatrix::zeros(n, n);
    for p in pts {
        let d = p - &mean;
        cov.syger(1.0, &d, &d, 1.0);
    }
    cov /= count - 1.0;
    cov.fill_upper_triangle_with_lower_triangle();
    (mean, cov)
}

/// Rejection estimate of the volume inside the bounding box, with its
/// standard error.
pub fn monte_carlo_volume(body: &ConvexBody, seed: u64, count: usize) -> Result<(f64, f64)> {
    let n = body.dim();
    if n > MAX_MC_VOLUME_DIM {
        return Err(GeomError::NoExactVolume(body.kind_name()));
    }
    let (lo, hi) = body.bounding_box();
    let box_vol: f64 = (0..n).map(|i| hi[i] - lo[i]).product();
    let blocks = count.div_ceil(crate::sampling::STREAM_BLOCK);
    let hits: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = crate::sampling::STREAM_BLOCK.min(count - b * crate::sampling::STREAM_BLOCK);
            let mut rng = stream_rng(seed, b as u64);
            (0..len)
                .filter(|_| {
                    let x = DVector::from_fn(n, |i, _| rng.random_range(lo[i]..=hi[i]));
                    body.contains(&x)
                })
                .count()
        })
        .sum();
    let p = hits as f64 / count as f64;
    Ok((box_vol * p, box_vol * (p * (1.0 - p) / count as f64).sqrt()))
}

/// Inverse square root of an SPD matrix, and its determinant.
fn inverse_sqrt(c: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let eig = c.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > CONDITION_LIMIT * max) || !max.is_finite() {
        return Err(GeomError::IllConditioned { ratio: min / max });
    }
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let det = d.iter().product();
    let q = &eig.eigenvectors;
    Ok((q * DMatrix::from_diagonal(&d) * q.transpose(), det))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropicModel {
    /// Sends the body to its isotropic image.
    pub map: AffineMap,
    pub l_hat: f64,
    /// Largest entry of `|Ĉ − l_hat²·I|` on fresh samples of the image.
    pub cov_residual: f64,
    /// Samples used for the residual check.
    pub sample_count: usize,
    /// Samples behind the moments (0 for closed forms).
    pub moment_samples: usize,
    /// Delta-method standard error of `l_hat`; 0 for closed-form moments.
    pub l_hat_std_error: f64,
    pub volume: f64,
    pub volume_exact: bool,
}

impl IsotropicModel {
    /// Statistical tolerance `4·l_hat²·√(n/N)` for the covariance residual.
    pub fn residual_tolerance(&self) -> f64 {
        let n = self.map.dim() as f64;
        4.0 * self.l_hat * self.l_hat * (n / self.sample_count.max(1) as f64).sqrt()
    }

    pub fn accepted(&self) -> bool {
        self.cov_residual <= self.residual_tolerance()
    }

    pub fn image(&self, body: &ConvexBody) -> Result<ConvexBody> {
        body.transform(&self.map)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IsotropyOptions {
    pub sampler: SamplerConfig,
    pub seed: u64,
    /// Samples for the residual check and any Monte Carlo volume; `None`
    /// uses [`default_sample_count`].
    pub samples: Option<usize>,
}

/// Builds `x ↦ s·C^{−1/2}(x − b)` with `s` making the image volume one. The
/// image then has covariance `s²·I`, so `l_hat = s`.
pub fn isotropic_transform(
    body: &ConvexBody,
    moments: &Moments,
    options: &IsotropyOptions,
) -> Result<IsotropicModel> {
    let n = body.dim();
    let count = options.samples.unwrap_or_else(|| default_sample_count(n));
    let (whiten, det_whiten) = inverse_sqrt(&moments.covariance)?;
    let (volume, volume_exact) = match body.exact_volume() {
        Ok(v) => (v, true),
        Err(_) => (monte_carlo_volume(body, options.seed ^ 0x766f_6c75_6d65, count.max(100_000))?.0, false),
    };
    let s = (-(volume.ln() + det_whiten.ln()) / n as f64).exp();
    let linear = &whiten * s;
    let shift = -(&linear * &moments.barycenter);
    let map = AffineMap::new(linear, shift)?;

    let l_hat_std_error = if moments.is_exact() {
        0.0
    } else {
        // Var(log det Ĉ) ≈ Var(|z|²)/N for whitened samples z
        let image = Arc::new(body.transform(&AffineMap::new(whiten.clone(), -(&whiten * &moments.barycenter))?)?);
        let pts = sample_parallel(&image, &options.sampler, options.seed, RESIDUAL_STREAM + 1, count)?;
        let r2: Vec<f64> = pts.iter().map(|z| z.norm_squared()).collect();
        let mean = r2.iter().sum::<f64>() / r2.len() as f64;
        let var = r2.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (r2.len() - 1) as f64;
        s * (var / moments.sample_count as f64).sqrt() / (2 * n) as f64
    };

    let image = Arc::new(body.transform(&map)?);
    let pts = sample_parallel(&image, &options.sampler, options.seed, RESIDUAL_STREAM, count)?;
    let (_, cov) = mean_and_covariance(&pts);
    let target = DMatrix::identity(n, n) * (s * s);
    let cov_residual = (cov - target).amax();

    Ok(IsotropicModel {
        map,
        l_hat: s,
        cov_residual,
        sample_count: count,
        moment_samples: moments.sample_count,
        l_hat_std_error,
        volume,
        volume_exact,
    })
}

/// Radius `√((n+2)/n)·l_hat` of a Euclidean ball inside every isotropic
/// image with isotropic constant `l_hat`.
pub fn kls_inradius(l_hat: f64, n: usize) -> f64 {
    ((n + 2) as f64 / n as f64).sqrt() * l_hat
}
