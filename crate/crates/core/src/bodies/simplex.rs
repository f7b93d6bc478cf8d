use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AffineMap, Halfspace};
use crate::error::{GeomError, Result};
use crate::numeric::{factorial, ln_factorial};

/// Relative determinant threshold below which a simplex is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;
/// Relative distance from the origin to every facet required before a
/// polar is formed.
pub const POLAR_MARGIN: f64 = 1e-8;

/// An n-simplex in ℝⁿ given by its n+1 vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Simplex {
    vertices: Vec<DVector<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for Simplex {
    type Error = GeomError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Simplex::from_rows(&rows)
    }
}

impl From<Simplex> for Vec<Vec<f64>> {
    fn from(s: Simplex) -> Self {
        s.to_rows()
    }
}

impl Simplex {
    /// Validates vertex count, dimensions, and affine independence.
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let s = Self::new_unchecked(vertices)?;
        s.check_nondegenerate()?;
        Ok(s)
    }

    /// Checks shape only; degeneracy is left to the caller.
    pub fn new_unchecked(vertices: Vec<DVector<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(GeomError::InvalidBody("a simplex needs at least 2 vertices".into()));
        }
        let n = vertices.len() - 1;
        for v in &vertices {
            if v.len() != n {
                return Err(GeomError::DimensionMismatch { expected: n, got: v.len() });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(GeomError::InvalidBody("non-finite vertex coordinate".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().copied().collect()).collect()
    }

    /// `S(e₁,…,eₙ,−Σeᵢ)`, barycenter at the origin.
    pub fn standard_centered(n: usize) -> Self {
        let mut vertices: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        vertices.push(DVector::from_element(n, -1.0));
        Self { vertices }
    }

    /// `S(0, s·e₁, …, s·eₙ)`.
    pub fn corner(n: usize, side: f64) -> Self {
        let mut vertices = vec![DVector::zeros(n)];
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = side;
            vertices.push(e);
        }
        Self { vertices }
    }

    /// Regular simplex centered at the origin with the given circumradius.
    /// Its inradius is `circumradius / n`.
    pub fn regular(n: usize, circumradius: f64) -> Self {
        // vertices eᵢ − 𝟙/(n+1) of the standard simplex in ℝⁿ⁺¹, expressed in
        // an orthonormal basis of the hyperplane Σxᵢ = 0
        let m = n + 1;
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut d = DVector::zeros(m);
            d[k] = 1.0;
            d[k + 1] = -1.0;
            for q in &basis {
                let proj = d.dot(q);
                d -= q * proj;
            }
            let norm = d.norm();
            basis.push(d / norm);
        }
        let r0 = (n as f64 / m as f64).sqrt();
        let vertices = (0..m)
            .map(|i| {
                let mut p = DVector::from_element(m, -1.0 / m as f64);
                p[i] += 1.0;
                DVector::from_iterator(n, basis.iter().map(|q| p.dot(q) * circumradius / r0))
            })
            .collect();
        Self { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &DVector<f64> {
        &self.vertices[i]
    }

    /// Columns `vᵢ − v₀`, i = 1..n.
    pub fn edge_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let v0 = &self.vertices[0];
        DMatrix::from_fn(n, n, |r, c| self.vertices[c + 1][r] - v0[r])
    }

    pub fn signed_det(&self) -> f64 {
        self.edge_matrix().determinant()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                best = best.max((&self.vertices[i] - &self.vertices[j]).norm());
            }
        }
        best
    }

    /// Largest coordinate magnitude over all vertices.
    pub fn scale(&self) -> f64 {
        self.vertices.iter().flat_map(|v| v.iter()).fold(0.0f64, |a, c| a.max(c.abs()))
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }

    pub fn is_degenerate(&self) -> bool {
        self.check_nondegenerate().is_err()
    }

    fn check_nondegenerate(&self) -> Result<()> {
        let n = self.dim();
        let det = self.signed_det().abs();
        let threshold = DEGENERACY_TOL * self.max_edge_length().powi(n as i32);
        if !(det > threshold) {
            return Err(GeomError::DegenerateSimplex { det, threshold });
        }
        Ok(())
    }

    /// `|det(v₁−v₀,…,vₙ−v₀)| / n!`.
    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let det = self.signed_det().abs();
        if n <= 20 {
            det / factorial(n)
        } else {
            (det.ln() - ln_factorial(n)).exp()
        }
    }

    pub fn barycenter(&self) -> DVector<f64> {
        let n = self.dim();
        let mut sum = DVector::zeros(n);
        for v in &self.vertices {
            sum += v;
        }
        sum / (n + 1) as f64
    }

    /// `∫_S x xᵀ dx = vol/((n+1)(n+2)) · (Σ vᵢvᵢᵀ + (Σvᵢ)(Σvᵢ)ᵀ)`.
    pub fn second_moment_integral(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut gram = DMatrix::zeros(n, n);
        let mut sum = DVector::zeros(n);
        for v in &self.vertices {
            gram += v * v.transpose();
            sum += v;
        }
        gram += &sum * sum.transpose();
        gram * (self.volume() / ((n + 1) * (n + 2)) as f64)
    }

    /// Facet `j` is the one opposite vertex `j`, as a unit outward normal and
    /// offset.
    pub fn facets(&self) -> Result<Vec<Halfspace>> {
        let n = self.dim();
        let inv = self
            .edge_matrix()
            .try_inverse()
            .ok_or(GeomError::DegenerateSimplex { det: 0.0, threshold: 0.0 })?;
        let v0 = &self.vertices[0];
        // barycentric coordinate λⱼ(x) = gⱼ·(x − v₀) for j ≥ 1
        let mut out = Vec::with_capacity(n + 1);
        let mut gsum = DVector::zeros(n);
        let mut grads = Vec::with_capacity(n);
        for j in 0..n {
            let g: DVector<f64> = inv.row(j).transpose();
            gsum += &g;
            grads.push(g);
        }
        // λ₀ = 1 − Σ gⱼ·(x − v₀) ≥ 0
        out.push(Halfspace::new(gsum.clone(), 1.0 + gsum.dot(v0)));
        for g in grads {
            out.push(Halfspace::new(-&g, -g.dot(v0)));
        }
        Ok(out)
    }

    /// Membership with an absolute tolerance on the facet inequalities.
    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self.facets() {
            Ok(f) => f.iter().all(|h| h.normal.dot(x) <= h.offset + tol),
            Err(_) => false,
        }
    }

    /// Distance from the origin to the nearest facet; negative when the origin
    /// lies outside.
    pub fn origin_margin(&self) -> Result<f64> {
        Ok(self.facets()?.iter().map(|h| h.offset).fold(f64::INFINITY, f64::min))
    }

    /// The polar simplex `{x : ⟨x,vᵢ⟩ ≤ 1 ∀i}`. Vertex `j` of the result
    /// solves `⟨w, vᵢ⟩ = 1` for every `i ≠ j`.
    pub fn polar(&self) -> Result<Simplex> {
        self.check_nondegenerate()?;
        let margin = self.origin_margin()?;
        if margin < POLAR_MARGIN * self.scale() {
            return Err(GeomError::PolarUnbounded { margin });
        }
        let n = self.dim();
        let ones = DVector::from_element(n, 1.0);
        let mut out = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let rows: Vec<&DVector<f64>> =
                self.vertices.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| v).collect();
            let a = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
            let w = a
                .lu()
                .solve(&ones)
                .ok_or(GeomError::DegenerateSimplex { det: 0.0, threshold: 0.0 })?;
            out.push(w);
        }
        // nondegenerate whenever the input is and the origin is interior; a
        // facet close to the origin makes it long and thin, which the
        // edge-relative test would misread
        Simplex::new_unchecked(out)
    }

    pub fn transform(&self, map: &AffineMap) -> Simplex {
        Simplex { vertices: self.vertices.iter().map(|v| map.apply(v)).collect() }
    }

    pub fn translate(&self, shift: &DVector<f64>) -> Simplex {
        Simplex { vertices: self.vertices.iter().map(|v| v + shift).collect() }
    }

    /// Homothety `x ↦ center + factor·(x − center)`.
    pub fn scaled_about(&self, center: &DVector<f64>, factor: f64) -> Simplex {
        Simplex {
            vertices: self.vertices.iter().map(|v| center + (v - center) * factor).collect(),
        }
    }
}

/// `|det(v₁−v₀,…,vₙ−v₀)| / n!`, failing on degenerate input.
pub fn simplex_volume(s: &Simplex) -> Result<f64> {
    s.check_nondegenerate()?;
    Ok(s.volume())
}

pub fn simplex_barycenter(s: &Simplex) -> DVector<f64> {
    s.barycenter()
}

pub fn polar_simplex(s: &Simplex) -> Result<Simplex> {
    s.polar()
}
