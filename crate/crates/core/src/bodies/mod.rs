//! Convex-body representations with exact geometry where closed forms exist.

mod affine;
pub mod hull;
pub mod lp;
mod simplex;
mod spec;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use affine::AffineMap;
pub use hull::Hull;
pub use simplex::{
    polar_simplex, simplex_barycenter, simplex_volume, Simplex, DEGENERACY_TOL, POLAR_MARGIN,
};
pub use spec::{BodySpec, MatrixSpec};

use crate::error::{GeomError, Result};
use crate::numeric::unit_ball_volume;
use lp::LpOutcome;

/// Relative boundary tolerance for membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Relative slack allowed when certifying simplex containment.
pub const CONTAINMENT_TOL: f64 = 1e-9;
/// Largest dimension for which polytope hulls are built (exact volume,
/// moments, vertex enumeration).
pub const MAX_HULL_DIM: usize = 8;
/// Largest dimension for which V-polytope membership uses cached facets.
pub const MAX_FACET_MEMBERSHIP_DIM: usize = 8;

/// `{x : ⟨normal, x⟩ ≤ offset}`; normals are unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length, rescaling the offset.
    pub fn new(normal: DVector<f64>, offset: f64) -> Self {
        let len = normal.norm();
        Self { normal: normal / len, offset: offset / len }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Ball { radius: f64, center: DVector<f64> },
    /// `[−h,h]ⁿ` when centered, else `[0,2h]ⁿ`.
    Cube { half_width: f64, centered: bool },
    /// `{x : (x−c)ᵀ shape⁻¹ (x−c) ≤ 1}`.
    Ellipsoid { shape: DMatrix<f64>, center: DVector<f64> },
    VPolytope { vertices: Vec<DVector<f64>> },
    /// `{x : normals·x ≤ offsets}`.
    HPolytope { normals: DMatrix<f64>, offsets: DVector<f64> },
    Simplex(Simplex),
}

/// Exact barycenter and covariance of the uniform distribution on a body.
#[derive(Debug, Clone)]
pub struct ExactMoments {
    pub volume: f64,
    pub barycenter: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

#[derive(Debug, Clone, Default)]
struct Aux {
    /// Ellipsoid: shape⁻¹ and a Cholesky factor `L` with `L Lᵀ = shape`.
    ellipsoid_inverse: Option<DMatrix<f64>>,
    ellipsoid_factor: Option<DMatrix<f64>>,
    /// H-polytope: bounding box and Chebyshev center.
    bbox: Option<(DVector<f64>, DVector<f64>)>,
    chebyshev: Option<(DVector<f64>, f64)>,
}

#[derive(Debug, Clone)]
pub struct ConvexBody {
    kind: BodyKind,
    dim: usize,
    aux: Aux,
    hull: OnceLock<Result<Hull>>,
}

impl PartialEq for ConvexBody {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(GeomError::InvalidBody(format!("{what} must be positive and finite, got {x}")))
    }
}

impl ConvexBody {
    fn from_kind(kind: BodyKind, dim: usize, aux: Aux) -> Self {
        Self { kind, dim, aux, hull: OnceLock::new() }
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball_at(DVector::zeros(dim), radius)
    }

    pub fn ball_at(center: DVector<f64>, radius: f64) -> Result<Self> {
        check_positive(radius, "radius")?;
        let dim = center.len();
        if dim == 0 {
            return Err(GeomError::InvalidBody("dimension must be positive".into()));
        }
        Ok(Self::from_kind(BodyKind::Ball { radius, center }, dim, Aux::default()))
    }

    pub fn cube(dim: usize, half_width: f64, centered: bool) -> Result<Self> {
        check_positive(half_width, "half_width")?;
        if dim == 0 {
            return Err(GeomError::InvalidBody("dimension must be positive".into()));
        }
        Ok(Self::from_kind(BodyKind::Cube { half_width, centered }, dim, Aux::default()))
    }

    /// `[0,1]ⁿ`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::cube(dim, 0.5, false)
    }

    pub fn ellipsoid(shape: DMatrix<f64>, center: DVector<f64>) -> Result<Self> {
        let dim = center.len();
        if shape.nrows() != dim || shape.ncols() != dim {
            return Err(GeomError::DimensionMismatch { expected: dim, got: shape.nrows() });
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        if (&sym - &shape).amax() > 1e-12 * shape.amax() {
            return Err(GeomError::InvalidBody("ellipsoid shape must be symmetric".into()));
        }
        let chol = sym
            .clone()
            .cholesky()
            .ok_or_else(|| GeomError::InvalidBody("ellipsoid shape must be positive definite".into()))?;
        let factor = chol.l();
        let inverse = chol.inverse();
        let aux = Aux {
            ellipsoid_inverse: Some(inverse),
            ellipsoid_factor: Some(factor),
            ..Aux::default()
        };
        Ok(Self::from_kind(BodyKind::Ellipsoid { shape: sym, center }, dim, aux))
    }

    pub fn vpolytope(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(GeomError::InvalidBody("V-polytope needs vertices".into()));
        };
        let dim = first.len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(GeomError::InvalidBody("vertices of mixed dimension".into()));
        }
        if vertices.len() < dim + 1 {
            return Err(GeomError::InvalidBody(format!(
                "V-polytope in dimension {dim} needs at least {} vertices",
                dim + 1
            )));
        }
        // full-dimensional: centered vertex matrix has rank n
        let mean = vertices.iter().fold(DVector::zeros(dim), |a, v| a + v) / vertices.len() as f64;
        let m = DMatrix::from_fn(dim, vertices.len(), |r, c| vertices[c][r] - mean[r]);
        let sv = m.singular_values();
        let top = sv.max();
        if !(sv.min() > 1e-10 * top) {
            return Err(GeomError::InvalidBody("V-polytope is not full-dimensional".into()));
        }
        Ok(Self::from_kind(BodyKind::VPolytope { vertices }, dim, Aux::default()))
    }

    /// Cross-polytope `conv(±r·eᵢ)`.
    pub fn cross_polytope(dim: usize, radius: f64) -> Result<Self> {
        check_positive(radius, "radius")?;
        let mut v = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut e = DVector::zeros(dim);
                e[i] = s * radius;
                v.push(e);
            }
        }
        Self::vpolytope(v)
    }

    pub fn hpolytope(normals: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self> {
        let (m, dim) = normals.shape();
        if offsets.len() != m {
            return Err(GeomError::DimensionMismatch { expected: m, got: offsets.len() });
        }
        if m < dim + 1 || dim == 0 {
            return Err(GeomError::NotABody(format!(
                "{m} halfspaces cannot bound a body in dimension {dim}"
            )));
        }
        if (0..m).any(|i| normals.row(i).norm() == 0.0) {
            return Err(GeomError::InvalidBody("zero normal".into()));
        }
        // bounded: finite support along ±eᵢ
        let mut lo = DVector::zeros(dim);
        let mut hi = DVector::zeros(dim);
        let offs: Vec<f64> = offsets.iter().copied().collect();
        for i in 0..dim {
            for (sign, slot) in [(1.0, &mut hi), (-1.0, &mut lo)] {
                let mut u = vec![0.0; dim];
                u[i] = sign;
                match lp::maximize_over_halfspaces(&normals, &offs, &u) {
                    LpOutcome::Optimal { value, .. } => slot[i] = sign * value,
                    LpOutcome::Unbounded => {
                        return Err(GeomError::NotABody("H-polytope is unbounded".into()))
                    }
                    LpOutcome::Infeasible { .. } => {
                        return Err(GeomError::NotABody("H-polytope is empty".into()))
                    }
                }
            }
        }
        // Chebyshev center: maximize r s.t. aᵢ·x + |aᵢ| r ≤ bᵢ
        let mut ext = DMatrix::zeros(m + 1, dim + 1);
        for i in 0..m {
            for j in 0..dim {
                ext[(i, j)] = normals[(i, j)];
            }
            ext[(i, dim)] = normals.row(i).norm();
        }
        ext[(m, dim)] = -1.0;
        let mut ext_off = offs.clone();
        ext_off.push(0.0);
        let mut obj = vec![0.0; dim + 1];
        obj[dim] = 1.0;
        let (center, radius) = match lp::maximize_over_halfspaces(&ext, &ext_off, &obj) {
            LpOutcome::Optimal { x, value } => (DVector::from_column_slice(&x[..dim]), value),
            _ => return Err(GeomError::NotABody("no Chebyshev center".into())),
        };
        let width = (&hi - &lo).amax();
        if !(radius > 1e-12 * width) {
            return Err(GeomError::NotABody("H-polytope has empty interior".into()));
        }
        let aux = Aux { bbox: Some((lo, hi)), chebyshev: Some((center, radius)), ..Aux::default() };
        Ok(Self::from_kind(BodyKind::HPolytope { normals, offsets }, dim, aux))
    }

    pub fn from_halfspaces(hs: &[Halfspace]) -> Result<Self> {
        let dim = hs.first().map(|h| h.normal.len()).unwrap_or(0);
        let normals = DMatrix::from_fn(hs.len(), dim, |r, c| hs[r].normal[c]);
        let offsets = DVector::from_iterator(hs.len(), hs.iter().map(|h| h.offset));
        Self::hpolytope(normals, offsets)
    }

    pub fn simplex(s: Simplex) -> Self {
        let dim = s.dim();
        Self::from_kind(BodyKind::Simplex(s), dim, Aux::default())
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            BodyKind::Ball { .. } => "ball",
            BodyKind::Cube { .. } => "cube",
            BodyKind::Ellipsoid { .. } => "ellipsoid",
            BodyKind::VPolytope { .. } => "vpolytope",
            BodyKind::HPolytope { .. } => "hpolytope",
            BodyKind::Simplex(_) => "simplex",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn cube_bounds(&self) -> (f64, f64) {
        match self.kind {
            BodyKind::Cube { half_width, centered: true } => (-half_width, half_width),
            BodyKind::Cube { half_width, centered: false } => (0.0, 2.0 * half_width),
            _ => unreachable!(),
        }
    }

    /// Largest coordinate magnitude over the body (exact or a tight upper
    /// bound); all relative tolerances are taken against this.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter().chain(hi.iter()).fold(0.0f64, |a, c| a.max(c.abs())).max(f64::MIN_POSITIVE)
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        let n = self.dim;
        match &self.kind {
            BodyKind::Ball { radius, center } => (center.add_scalar(-radius), center.add_scalar(*radius)),
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                (DVector::from_element(n, lo), DVector::from_element(n, hi))
            }
            BodyKind::Ellipsoid { shape, center } => {
                let ext = DVector::from_fn(n, |i, _| shape[(i, i)].sqrt());
                (center - &ext, center + &ext)
            }
            BodyKind::VPolytope { vertices } => point_box(vertices),
            BodyKind::Simplex(s) => point_box(s.vertices()),
            BodyKind::HPolytope { .. } => self.aux.bbox.clone().expect("validated at construction"),
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.contains_with_tol(x, MEMBERSHIP_TOL * self.scale())
    }

    /// Membership with an absolute boundary tolerance (`0.0` for strict
    /// closed-set membership).
    pub fn contains_with_tol(&self, x: &DVector<f64>, tol: f64) -> bool {
        assert_eq!(x.len(), self.dim, "point dimension must match body");
        match &self.kind {
            BodyKind::Ball { radius, center } => (x - center).norm() <= radius + tol,
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                x.iter().all(|&c| c >= lo - tol && c <= hi + tol)
            }
            BodyKind::Ellipsoid { center, .. } => {
                let inv = self.aux.ellipsoid_inverse.as_ref().unwrap();
                let d = x - center;
                let q = d.dot(&(inv * &d));
                // tol is a distance; compare in the gauge
                q.sqrt() <= 1.0 + tol / self.scale()
            }
            BodyKind::HPolytope { normals, offsets } => (0..normals.nrows()).all(|i| {
                let a = normals.row(i);
                a.transpose().dot(x) <= offsets[i] + tol * a.norm()
            }),
            BodyKind::Simplex(s) => s.contains_point(x, tol),
            BodyKind::VPolytope { vertices } => {
                if self.dim <= MAX_FACET_MEMBERSHIP_DIM {
                    if let Ok(h) = self.hull() {
                        return h.margin(x) >= -tol;
                    }
                }
                let pts: Vec<Vec<f64>> = vertices.iter().map(|v| v.iter().copied().collect()).collect();
                let xs: Vec<f64> = x.iter().copied().collect();
                lp::in_convex_hull(&pts, &xs, tol)
            }
        }
    }

    /// Support function `h_K(u) = max_{x∈K} ⟨x,u⟩`.
    pub fn support(&self, u: &DVector<f64>) -> Result<f64> {
        if u.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        if u.norm() == 0.0 {
            return Err(GeomError::InvalidBody("support direction must be nonzero".into()));
        }
        Ok(match &self.kind {
            BodyKind::Ball { radius, center } => center.dot(u) + radius * u.norm(),
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                u.iter().map(|&c| (lo * c).max(hi * c)).sum()
            }
            BodyKind::Ellipsoid { shape, center } => center.dot(u) + u.dot(&(shape * u)).sqrt(),
            BodyKind::VPolytope { vertices } => max_dot(vertices, u),
            BodyKind::Simplex(s) => max_dot(s.vertices(), u),
            BodyKind::HPolytope { normals, offsets } => {
                let offs: Vec<f64> = offsets.iter().copied().collect();
                let us: Vec<f64> = u.iter().copied().collect();
                match lp::maximize_over_halfspaces(normals, &offs, &us) {
                    LpOutcome::Optimal { value, .. } => value,
                    LpOutcome::Unbounded => {
                        return Err(GeomError::NotABody("support LP is unbounded".into()))
                    }
                    LpOutcome::Infeasible { .. } => {
                        return Err(GeomError::NotABody("support LP is infeasible".into()))
                    }
                }
            }
        })
    }

    /// Hull of the vertices (V-polytope) or of the enumerated vertices
    /// (H-polytope). Built once.
    pub fn hull(&self) -> Result<&Hull> {
        let h = self.hull.get_or_init(|| match &self.kind {
            BodyKind::VPolytope { vertices } => {
                if self.dim > MAX_HULL_DIM {
                    return Err(GeomError::NoExactVolume("vpolytope above dimension 8"));
                }
                Hull::new(vertices)
            }
            BodyKind::HPolytope { normals, offsets } => {
                if self.dim > MAX_HULL_DIM {
                    return Err(GeomError::NoExactVolume("hpolytope above dimension 8"));
                }
                enumerate_vertices(normals, offsets, self.aux.chebyshev.as_ref().unwrap())
                    .and_then(|v| Hull::new(&v))
            }
            _ => Err(GeomError::Internal("hull requested for a non-polytope".into())),
        });
        h.as_ref().map_err(Clone::clone)
    }

    /// Facet description when one is available without solving LPs per query.
    pub fn halfspaces(&self) -> Option<Vec<Halfspace>> {
        match &self.kind {
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                let mut out = Vec::with_capacity(2 * self.dim);
                for i in 0..self.dim {
                    let mut e = DVector::zeros(self.dim);
                    e[i] = 1.0;
                    out.push(Halfspace { normal: e.clone(), offset: hi });
                    out.push(Halfspace { normal: -e, offset: -lo });
                }
                Some(out)
            }
            BodyKind::HPolytope { normals, offsets } => Some(
                (0..normals.nrows())
                    .map(|i| Halfspace::new(normals.row(i).transpose(), offsets[i]))
                    .collect(),
            ),
            BodyKind::Simplex(s) => s.facets().ok(),
            BodyKind::VPolytope { .. } if self.dim <= MAX_FACET_MEMBERSHIP_DIM => {
                self.hull().ok().map(|h| h.halfspaces())
            }
            _ => None,
        }
    }

    /// Vertices of a polytope body.
    pub fn polytope_vertices(&self) -> Option<Vec<DVector<f64>>> {
        match &self.kind {
            BodyKind::Simplex(s) => Some(s.vertices().to_vec()),
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                let n = self.dim;
                if n > 20 {
                    return None;
                }
                Some(
                    (0..1u64 << n)
                        .map(|m| DVector::from_fn(n, |i, _| if m >> i & 1 == 1 { hi } else { lo }))
                        .collect(),
                )
            }
            BodyKind::VPolytope { .. } | BodyKind::HPolytope { .. } => {
                let h = self.hull().ok()?;
                Some(h.vertex_indices().into_iter().map(|i| h.points[i].clone()).collect())
            }
            _ => None,
        }
    }

    /// A point in the interior.
    pub fn interior_point(&self) -> DVector<f64> {
        match &self.kind {
            BodyKind::Ball { center, .. } | BodyKind::Ellipsoid { center, .. } => center.clone(),
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                DVector::from_element(self.dim, 0.5 * (lo + hi))
            }
            BodyKind::Simplex(s) => s.barycenter(),
            BodyKind::VPolytope { vertices } => {
                vertices.iter().fold(DVector::zeros(self.dim), |a, v| a + v) / vertices.len() as f64
            }
            BodyKind::HPolytope { .. } => self.aux.chebyshev.as_ref().unwrap().0.clone(),
        }
    }

    pub fn ellipsoid_factor(&self) -> Option<&DMatrix<f64>> {
        self.aux.ellipsoid_factor.as_ref()
    }

    /// Closed-form volume, or exact triangulation for polytopes up to
    /// dimension 8.
    pub fn exact_volume(&self) -> Result<f64> {
        let n = self.dim;
        Ok(match &self.kind {
            BodyKind::Ball { radius, .. } => unit_ball_volume(n) * radius.powi(n as i32),
            BodyKind::Cube { half_width, .. } => (2.0 * half_width).powi(n as i32),
            BodyKind::Ellipsoid { shape, .. } => unit_ball_volume(n) * shape.determinant().sqrt(),
            BodyKind::Simplex(s) => s.volume(),
            BodyKind::VPolytope { .. } | BodyKind::HPolytope { .. } => self.hull()?.volume(),
        })
    }

    /// Exact barycenter and covariance of the uniform distribution.
    pub fn exact_moments(&self) -> Result<ExactMoments> {
        let n = self.dim;
        let volume = self.exact_volume()?;
        let (barycenter, covariance) = match &self.kind {
            BodyKind::Ball { radius, center } => {
                (center.clone(), DMatrix::identity(n, n) * (radius * radius / (n + 2) as f64))
            }
            BodyKind::Cube { half_width, .. } => (
                self.interior_point(),
                DMatrix::identity(n, n) * (half_width * half_width / 3.0),
            ),
            BodyKind::Ellipsoid { shape, center } => (center.clone(), shape / (n + 2) as f64),
            BodyKind::Simplex(s) => {
                let b = s.barycenter();
                let second = s.second_moment_integral() / volume;
                let cov = second - &b * b.transpose();
                (b, cov)
            }
            BodyKind::VPolytope { .. } | BodyKind::HPolytope { .. } => {
                let m = self.hull()?.moments();
                let b = &m.first / m.volume;
                let cov = &m.second / m.volume - &b * b.transpose();
                (b, cov)
            }
        };
        Ok(ExactMoments { volume, barycenter, covariance: symmetrize(covariance) })
    }

    /// Image of the body under an affine map, keeping the representation
    /// kind where the map allows it.
    pub fn transform(&self, map: &AffineMap) -> Result<ConvexBody> {
        if map.dim() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: map.dim() });
        }
        let lin = map.linear();
        let scale = map.uniform_scale();
        match &self.kind {
            BodyKind::Ball { radius, center } => match scale {
                Some(a) => ConvexBody::ball_at(map.apply(center), radius * a),
                None => ConvexBody::ellipsoid(lin * lin.transpose() * (radius * radius), map.apply(center)),
            },
            BodyKind::Ellipsoid { shape, center } => {
                ConvexBody::ellipsoid(lin * shape * lin.transpose(), map.apply(center))
            }
            BodyKind::Cube { half_width, .. } => {
                if let Some(a) = scale {
                    let mid = map.apply(&self.interior_point());
                    let h = half_width * a;
                    if mid.amax() <= 1e-12 * h {
                        return ConvexBody::cube(self.dim, h, true);
                    }
                    if (mid.add_scalar(-h)).amax() <= 1e-12 * h {
                        return ConvexBody::cube(self.dim, h, false);
                    }
                }
                ConvexBody::from_halfspaces(&self.halfspaces().unwrap())?.transform(map)
            }
            BodyKind::VPolytope { vertices } => {
                ConvexBody::vpolytope(vertices.iter().map(|v| map.apply(v)).collect())
            }
            BodyKind::Simplex(s) => Ok(ConvexBody::simplex(s.transform(map))),
            BodyKind::HPolytope { normals, offsets } => {
                // x = L⁻¹(y − s): A L⁻¹ y ≤ b + A L⁻¹ s
                let inv = map.inverse();
                let a = normals * inv.linear();
                let b = offsets + &a * map.shift();
                ConvexBody::hpolytope(a, b)
            }
        }
    }

    pub fn translate(&self, shift: &DVector<f64>) -> Result<ConvexBody> {
        self.transform(&AffineMap::translation(shift.clone()))
    }

    /// Distance from the origin to the boundary (a lower bound for
    /// ellipsoids), negative when the origin is outside.
    pub fn origin_margin(&self) -> Result<f64> {
        let n = self.dim;
        Ok(match &self.kind {
            BodyKind::Ball { radius, center } => radius - center.norm(),
            BodyKind::Cube { .. } => {
                let (lo, hi) = self.cube_bounds();
                (-lo).min(hi)
            }
            BodyKind::Ellipsoid { shape, center } => {
                // the gauge is 1/√λmin-Lipschitz, so (1 − gauge(0))·√λmin
                // bounds the distance to the boundary from below
                let inv = self.aux.ellipsoid_inverse.as_ref().unwrap();
                let gauge = center.dot(&(inv * center)).sqrt();
                let lam_min = shape.clone().symmetric_eigenvalues().min();
                (1.0 - gauge) * lam_min.sqrt()
            }
            BodyKind::HPolytope { normals, offsets } => (0..normals.nrows())
                .map(|i| offsets[i] / normals.row(i).norm())
                .fold(f64::INFINITY, f64::min),
            BodyKind::Simplex(s) => s.origin_margin()?,
            BodyKind::VPolytope { vertices } => {
                if n <= MAX_HULL_DIM {
                    self.hull()?.margin(&DVector::zeros(n))
                } else {
                    let pts: Vec<Vec<f64>> =
                        vertices.iter().map(|v| v.iter().copied().collect()).collect();
                    if lp::in_convex_hull(&pts, &vec![0.0; n], 0.0) {
                        f64::MIN_POSITIVE
                    } else {
                        -1.0
                    }
                }
            }
        })
    }

    fn require_origin_interior(&self) -> Result<()> {
        let margin = self.origin_margin()?;
        if margin < POLAR_MARGIN * self.scale() {
            return Err(GeomError::PolarUnbounded { margin });
        }
        Ok(())
    }

    /// Polar body `{x : ⟨x,y⟩ ≤ 1 ∀y ∈ K}`.
    pub fn polar(&self) -> Result<ConvexBody> {
        self.require_origin_interior()?;
        let n = self.dim;
        match &self.kind {
            BodyKind::Ball { radius, center } if center.amax() == 0.0 => ConvexBody::ball(n, 1.0 / radius),
            BodyKind::Ball { radius, center } => {
                off_center_ellipsoid_polar(&(DMatrix::identity(n, n) * (radius * radius)), center)
            }
            BodyKind::Ellipsoid { shape, center } => {
                if center.amax() == 0.0 {
                    let inv = self.aux.ellipsoid_inverse.clone().unwrap();
                    ConvexBody::ellipsoid(symmetrize(inv), center.clone())
                } else {
                    off_center_ellipsoid_polar(shape, center)
                }
            }
            BodyKind::Cube { .. } => ConvexBody::from_halfspaces(&self.halfspaces().unwrap())?.polar(),
            BodyKind::VPolytope { vertices } => {
                let normals = DMatrix::from_fn(vertices.len(), n, |r, c| vertices[r][c]);
                ConvexBody::hpolytope(normals, DVector::from_element(vertices.len(), 1.0))
            }
            BodyKind::HPolytope { normals, offsets } => ConvexBody::vpolytope(
                (0..normals.nrows()).map(|i| normals.row(i).transpose() / offsets[i]).collect(),
            ),
            BodyKind::Simplex(s) => Ok(ConvexBody::simplex(s.polar()?)),
        }
    }
}

/// Whether `s ⊇ k`: for every facet of `s` with unit outward normal `u` and
/// offset `c`, `h_k(u) ≤ c + 1e-9·scale`.
pub fn simplex_contains_body(s: &Simplex, k: &ConvexBody) -> Result<bool> {
    if s.dim() != k.dim() {
        return Err(GeomError::DimensionMismatch { expected: s.dim(), got: k.dim() });
    }
    let scale = s.scale().max(k.scale());
    for facet in s.facets()? {
        if k.support(&facet.normal)? > facet.offset + CONTAINMENT_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn polar_body(k: &ConvexBody) -> Result<ConvexBody> {
    k.polar()
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn point_box(points: &[DVector<f64>]) -> (DVector<f64>, DVector<f64>) {
    let n = points[0].len();
    let mut lo = DVector::from_element(n, f64::INFINITY);
    let mut hi = DVector::from_element(n, f64::NEG_INFINITY);
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

fn max_dot(points: &[DVector<f64>], u: &DVector<f64>) -> f64 {
    points.iter().map(|p| p.dot(u)).fold(f64::NEG_INFINITY, f64::max)
}

/// Vertices of `{x : A x ≤ b}` from the facets of the dual point set
/// `{aᵢ/(bᵢ − aᵢ·c)}` taken about an interior point `c`.
fn enumerate_vertices(
    normals: &DMatrix<f64>,
    offsets: &DVector<f64>,
    chebyshev: &(DVector<f64>, f64),
) -> Result<Vec<DVector<f64>>> {
    let c = &chebyshev.0;
    let dual: Vec<DVector<f64>> = (0..normals.nrows())
        .map(|i| {
            let a = normals.row(i).transpose();
            let slack = offsets[i] - a.dot(c);
            a / slack
        })
        .collect();
    let dual_hull = Hull::new(&dual)?;
    Ok(dual_hull
        .halfspaces()
        .into_iter()
        .map(|h| c + h.normal / h.offset)
        .collect())
}

/// Polar of `{x : (x−c)ᵀM⁻¹(x−c) ≤ 1}` when the origin is interior:
/// with `Q = M − ccᵀ`, the polar is the ellipsoid centered at `−Q⁻¹c` with
/// shape `(1 + cᵀQ⁻¹c)·Q⁻¹`.
fn off_center_ellipsoid_polar(shape: &DMatrix<f64>, center: &DVector<f64>) -> Result<ConvexBody> {
    let q = shape - center * center.transpose();
    let q_inv = symmetrize(
        q.try_inverse()
            .ok_or(GeomError::PolarUnbounded { margin: 0.0 })?,
    );
    let qc = &q_inv * center;
    let alpha = 1.0 + center.dot(&qc);
    ConvexBody::ellipsoid(q_inv * alpha, -qc)
}

#[cfg(test)]
mod tests;
