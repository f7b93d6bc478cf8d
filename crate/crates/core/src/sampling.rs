//! Uniform samplers: closed-form samplers for balls, cubes, ellipsoids and
//! simplices, and a hit-and-run chain for everything else.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodyKind, ConvexBody, Halfspace};
use crate::error::{GeomError, Result};

/// Relative precision of bisected chord endpoints.
pub const CHORD_TOL: f64 = 1e-10;
pub const CHORD_MAX_ITERS: usize = 200;
/// Points drawn per stream when a large sample is split across threads.
pub const STREAM_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    Exact,
    HitAndRun,
}

impl SamplerMethod {
    /// Exact when the body has a closed-form sampler, hit-and-run otherwise.
    pub fn auto(body: &ConvexBody) -> Self {
        if has_exact_sampler(body) {
            SamplerMethod::Exact
        } else {
            SamplerMethod::HitAndRun
        }
    }
}

impl fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMethod::Exact => "exact",
            SamplerMethod::HitAndRun => "hnr",
        })
    }
}

impl FromStr for SamplerMethod {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerMethod::Exact),
            "hnr" | "hit_and_run" | "hit-and-run" => Ok(SamplerMethod::HitAndRun),
            other => Err(GeomError::Sampler(format!("unknown sampler \"{other}\""))),
        }
    }
}

/// Sampler choice plus chain parameters. `None` chain parameters resolve to
/// `50·n²` burn-in and `n²` thinning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// `None` picks [`SamplerMethod::auto`].
    pub method: Option<SamplerMethod>,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
}

impl SamplerConfig {
    pub fn exact() -> Self {
        Self { method: Some(SamplerMethod::Exact), ..Self::default() }
    }

    pub fn hit_and_run() -> Self {
        Self { method: Some(SamplerMethod::HitAndRun), ..Self::default() }
    }

    pub fn method_for(&self, body: &ConvexBody) -> SamplerMethod {
        self.method.unwrap_or_else(|| SamplerMethod::auto(body))
    }

    pub fn burn_in_for(&self, n: usize) -> usize {
        self.burn_in.unwrap_or(50 * n * n)
    }

    pub fn thinning_for(&self, n: usize) -> usize {
        self.thinning.unwrap_or(n * n).max(1)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `stream` derived from a master seed.
pub fn stream_seed(master: u64, stream: u64) -> u64 {
    master ^ splitmix64(stream)
}

pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, stream))
}

pub fn has_exact_sampler(body: &ConvexBody) -> bool {
    matches!(
        body.kind(),
        BodyKind::Ball { .. } | BodyKind::Cube { .. } | BodyKind::Ellipsoid { .. } | BodyKind::Simplex(_)
    )
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Uniform direction on the unit sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let g = gaussian(rng, n);
        let norm = g.norm();
        if norm > 1e-300 {
            return g / norm;
        }
    }
}

fn unit_ball_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    let u: f64 = rng.random();
    random_direction(rng, n) * u.powf(1.0 / n as f64)
}

/// One exactly uniform point. Draws that round onto the wrong side of the
/// boundary are redrawn, so every returned point is a member at tolerance 0.
pub fn sample_exact<R: Rng + ?Sized>(body: &ConvexBody, rng: &mut R) -> Result<DVector<f64>> {
    let n = body.dim();
    loop {
        let x = match body.kind() {
            BodyKind::Ball { radius, center } => center + unit_ball_point(rng, n) * *radius,
            BodyKind::Cube { .. } => {
                let (lo, hi) = body.bounding_box();
                DVector::from_fn(n, |i, _| rng.random_range(lo[i]..=hi[i]))
            }
            BodyKind::Ellipsoid { center, .. } => {
                let l = body.ellipsoid_factor().expect("ellipsoid has a factor");
                center + l * unit_ball_point(rng, n)
            }
            BodyKind::Simplex(s) => {
                let w: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let total: f64 = w.iter().sum();
                s.vertices().iter().zip(&w).fold(DVector::zeros(n), |acc, (v, wi)| acc + v * (wi / total))
            }
            _ => return Err(GeomError::NoExactSampler(body.kind_name())),
        };
        if body.contains_with_tol(&x, 0.0) {
            return Ok(x);
        }
    }
}

/// Chord `{x + t·u : t ∈ [lo, hi]}` of the body through `x`.
pub fn chord(body: &ConvexBody, x: &DVector<f64>, u: &DVector<f64>) -> Result<(f64, f64)> {
    chord_with(body, facet_list(body).as_deref(), x, u)
}

fn chord_with(
    body: &ConvexBody,
    facets: Option<&[Halfspace]>,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<(f64, f64)> {
    match body.kind() {
        BodyKind::Ball { radius, center } => Ok(quadratic_chord(&(x - center), u, *radius)),
        BodyKind::Ellipsoid { center, .. } => {
            let l = body.ellipsoid_factor().expect("ellipsoid has a factor");
            let y = l.solve_lower_triangular(&(x - center)).expect("factor is nonsingular");
            let v = l.solve_lower_triangular(u).expect("factor is nonsingular");
            Ok(quadratic_chord(&y, &v, 1.0))
        }
        BodyKind::Cube { .. } => {
            let (lo, hi) = body.bounding_box();
            let mut t = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..x.len() {
                if u[i] != 0.0 {
                    let a = (lo[i] - x[i]) / u[i];
                    let b = (hi[i] - x[i]) / u[i];
                    t.0 = t.0.max(a.min(b));
                    t.1 = t.1.min(a.max(b));
                }
            }
            Ok(t)
        }
        _ => match facets {
            Some(hs) => Ok(halfspace_chord(hs, x, u)),
            None => bisect_chord(body, x, u),
        },
    }
}

fn facet_list(body: &ConvexBody) -> Option<Vec<Halfspace>> {
    match body.kind() {
        BodyKind::HPolytope { .. } | BodyKind::Simplex(_) => body.halfspaces(),
        BodyKind::VPolytope { .. } => body.halfspaces(),
        _ => None,
    }
}

fn quadratic_chord(y: &DVector<f64>, v: &DVector<f64>, r: f64) -> (f64, f64) {
    // |y + t v|² = r²
    let a = v.norm_squared();
    let b = y.dot(v);
    let c = y.norm_squared() - r * r;
    let disc = (b * b - a * c).max(0.0).sqrt();
    ((-b - disc) / a, (-b + disc) / a)
}

/// Closed-form chord in `{x : ⟨aᵢ,x⟩ ≤ bᵢ}`.
pub fn halfspace_chord(hs: &[Halfspace], x: &DVector<f64>, u: &DVector<f64>) -> (f64, f64) {
    let mut t = (f64::NEG_INFINITY, f64::INFINITY);
    for h in hs {
        let au = h.normal.dot(u);
        let slack = h.offset - h.normal.dot(x);
        if au > 0.0 {
            t.1 = t.1.min(slack / au);
        } else if au < 0.0 {
            t.0 = t.0.max(slack / au);
        }
    }
    t
}

fn bisect_chord(body: &ConvexBody, x: &DVector<f64>, u: &DVector<f64>) -> Result<(f64, f64)> {
    let scale = body.scale();
    let tol = CHORD_TOL * scale;
    let end = |sign: f64| -> Result<f64> {
        let inside = |t: f64| body.contains_with_tol(&(x + u * (sign * t)), 0.0);
        let mut lo = 0.0;
        let mut hi = scale;
        // a convex body has diameter ≤ 2√n·scale, so this loop is short
        while inside(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 * scale {
                return Err(GeomError::Sampler("chord does not terminate".into()));
            }
        }
        for _ in 0..CHORD_MAX_ITERS {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(sign * lo)
    };
    let hi = end(1.0)?;
    let lo = end(-1.0)?;
    Ok((lo, hi))
}

/// One hit-and-run move from `x`. Returns `None` when the chord through `x`
/// is empty (the point sits on the boundary).
pub fn hit_and_run_step<R: Rng + ?Sized>(
    body: &ConvexBody,
    x: &DVector<f64>,
    rng: &mut R,
) -> Result<Option<DVector<f64>>> {
    step_with(body, facet_list(body).as_deref(), x, rng)
}

fn step_with<R: Rng + ?Sized>(
    body: &ConvexBody,
    facets: Option<&[Halfspace]>,
    x: &DVector<f64>,
    rng: &mut R,
) -> Result<Option<DVector<f64>>> {
    let n = body.dim();
    let u = random_direction(rng, n);
    let (lo, hi) = chord_with(body, facets, x, &u)?;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Ok(None);
    }
    // endpoint rounding can put a draw a hair outside; redraw a few times
    for _ in 0..16 {
        let t = rng.random_range(lo..=hi);
        let y = x + &u * t;
        if body.contains_with_tol(&y, 0.0) {
            return Ok(Some(y));
        }
    }
    Ok(Some(x.clone()))
}

/// A single-threaded uniform sampler over one body.
#[derive(Debug, Clone)]
pub struct SamplerHandle {
    body: Arc<ConvexBody>,
    method: SamplerMethod,
    seed: u64,
    burn_in: usize,
    thinning: usize,
    current: DVector<f64>,
    burned: bool,
    reseeds: usize,
    rng: ChaCha8Rng,
    facets: Option<Vec<Halfspace>>,
}

impl SamplerHandle {
    pub fn new(body: Arc<ConvexBody>, config: &SamplerConfig, seed: u64) -> Result<Self> {
        let n = body.dim();
        let method = config.method_for(&body);
        if method == SamplerMethod::Exact && !has_exact_sampler(&body) {
            return Err(GeomError::NoExactSampler(body.kind_name()));
        }
        let current = body.interior_point();
        let facets = if method == SamplerMethod::HitAndRun { facet_list(&body) } else { None };
        Ok(Self {
            facets,
            method,
            seed,
            burn_in: config.burn_in_for(n),
            thinning: config.thinning_for(n),
            current,
            burned: false,
            reseeds: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            body,
        })
    }

    /// Handle for stream `stream` of a master seed.
    pub fn for_stream(body: Arc<ConvexBody>, config: &SamplerConfig, master: u64, stream: u64) -> Result<Self> {
        Self::new(body, config, stream_seed(master, stream))
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn method(&self) -> SamplerMethod {
        self.method
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn thinning(&self) -> usize {
        self.thinning
    }

    pub fn current_point(&self) -> &DVector<f64> {
        &self.current
    }

    /// Number of times the chain was restarted from the interior point.
    pub fn reseeds(&self) -> usize {
        self.reseeds
    }

    fn chain_step(&mut self) -> Result<()> {
        match step_with(&self.body, self.facets.as_deref(), &self.current, &mut self.rng)? {
            Some(y) => self.current = y,
            None => {
                self.current = self.body.interior_point();
                self.reseeds += 1;
            }
        }
        Ok(())
    }

    pub fn next_point(&mut self) -> Result<DVector<f64>> {
        match self.method {
            SamplerMethod::Exact => {
                self.current = sample_exact(&self.body, &mut self.rng)?;
            }
            SamplerMethod::HitAndRun => {
                if !self.burned {
                    for _ in 0..self.burn_in {
                        self.chain_step()?;
                    }
                    self.burned = true;
                }
                for _ in 0..self.thinning {
                    self.chain_step()?;
                }
            }
        }
        Ok(self.current.clone())
    }

    pub fn sample(&mut self, count: usize) -> Result<Vec<DVector<f64>>> {
        (0..count).map(|_| self.next_point()).collect()
    }
}

/// `count` points split into blocks of [`STREAM_BLOCK`], block `i` drawn
/// from stream `first_stream + i`. The result does not depend on the number
/// of threads.
pub fn sample_parallel(
    body: &Arc<ConvexBody>,
    config: &SamplerConfig,
    master: u64,
    first_stream: u64,
    count: usize,
) -> Result<Vec<DVector<f64>>> {
    let blocks = count.div_ceil(STREAM_BLOCK);
    let parts: Result<Vec<Vec<DVector<f64>>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = STREAM_BLOCK.min(count - b * STREAM_BLOCK);
            let mut h = SamplerHandle::for_stream(body.clone(), config, master, first_stream + b as u64)?;
            h.sample(len)
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}
