//! Convex hulls in ℝⁿ by incremental beneath-beyond insertion with
//! simplicial facets. The boundary triangulation is coned from an interior
//! point to obtain exact volumes and moments of polytopes at desk scale.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::Halfspace;
use crate::error::{GeomError, Result};
use crate::numeric::factorial;

#[derive(Debug, Clone)]
pub struct HullFacet {
    /// Indices into [`Hull::points`], exactly n of them.
    pub vertices: Vec<usize>,
    /// Unit outward normal.
    pub normal: DVector<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub points: Vec<DVector<f64>>,
    pub facets: Vec<HullFacet>,
    pub interior: DVector<f64>,
}

/// Volume, first moment `∫x` and second moment `∫xxᵀ` of a polytope.
#[derive(Debug, Clone)]
pub struct PolytopeMoments {
    pub volume: f64,
    pub first: DVector<f64>,
    pub second: DMatrix<f64>,
}

fn orthonormalize(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut d = v.clone();
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for q in &basis {
                let p = d.dot(q);
                d -= q * p;
            }
        }
        let norm = d.norm();
        if norm > 0.0 {
            basis.push(d / norm);
        }
    }
    basis
}

/// Unit normal of the hyperplane through `pts` (n points in ℝⁿ).
fn hyperplane_normal(pts: &[&DVector<f64>]) -> Option<DVector<f64>> {
    let n = pts[0].len();
    let diffs: Vec<DVector<f64>> = pts[1..].iter().map(|p| *p - pts[0]).collect();
    let basis = orthonormalize(&diffs);
    if basis.len() != n - 1 {
        return None;
    }
    let mut best: Option<DVector<f64>> = None;
    let mut best_norm = 0.0;
    for i in 0..n {
        let mut r = DVector::zeros(n);
        r[i] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let p = r.dot(q);
                r -= q * p;
            }
        }
        let norm = r.norm();
        if norm > best_norm {
            best_norm = norm;
            best = Some(r);
        }
    }
    best.filter(|_| best_norm > 1e-8).map(|r| r.normalize())
}

impl Hull {
    pub fn new(points: &[DVector<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(GeomError::InvalidBody("empty point set".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(GeomError::InvalidBody("points of mixed dimension".into()));
        }
        if n < 1 || points.len() < n + 1 {
            return Err(GeomError::InvalidBody(format!(
                "need at least {} points for a full-dimensional hull, got {}",
                n + 1,
                points.len()
            )));
        }
        let scale = points.iter().flat_map(|p| p.iter()).fold(0.0f64, |a, c| a.max(c.abs()));
        let eps = 1e-10 * scale.max(f64::MIN_POSITIVE);

        // initial simplex: greedily maximize distance to the current affine span
        let first = (0..points.len())
            .min_by(|&a, &b| points[a][0].partial_cmp(&points[b][0]).unwrap())
            .unwrap();
        let mut chosen = vec![first];
        let mut basis: Vec<DVector<f64>> = Vec::new();
        while chosen.len() < n + 1 {
            let mut best = None;
            let mut best_d = 0.0;
            for (i, p) in points.iter().enumerate() {
                let mut r = p - &points[first];
                for q in &basis {
                    let proj = r.dot(q);
                    r -= q * proj;
                }
                let d = r.norm();
                if d > best_d {
                    best_d = d;
                    best = Some((i, r));
                }
            }
            match best {
                Some((i, r)) if best_d > 1e-9 * scale => {
                    let mut r = r;
                    for q in &basis {
                        let proj = r.dot(q);
                        r -= q * proj;
                    }
                    basis.push(r.normalize());
                    chosen.push(i);
                }
                _ => {
                    return Err(GeomError::InvalidBody(
                        "points are not full-dimensional".into(),
                    ))
                }
            }
        }

        let mut interior = DVector::zeros(n);
        for &i in &chosen {
            interior += &points[i];
        }
        interior /= (n + 1) as f64;

        let mut hull = Hull { points: points.to_vec(), facets: Vec::new(), interior };
        for skip in 0..=n {
            let verts: Vec<usize> =
                chosen.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect();
            let f = hull.make_facet(verts)?;
            hull.facets.push(f);
        }

        let mut in_initial = vec![false; points.len()];
        for &i in &chosen {
            in_initial[i] = true;
        }
        for idx in 0..points.len() {
            if in_initial[idx] {
                continue;
            }
            hull.insert(idx, eps)?;
        }
        Ok(hull)
    }

    fn make_facet(&self, mut vertices: Vec<usize>) -> Result<HullFacet> {
        vertices.sort_unstable();
        let pts: Vec<&DVector<f64>> = vertices.iter().map(|&i| &self.points[i]).collect();
        let mut normal = hyperplane_normal(&pts)
            .ok_or_else(|| GeomError::Internal("degenerate hull facet".into()))?;
        let mut offset = normal.dot(pts[0]);
        if normal.dot(&self.interior) > offset {
            normal = -normal;
            offset = -offset;
        }
        Ok(HullFacet { vertices, normal, offset })
    }

    fn insert(&mut self, idx: usize, eps: f64) -> Result<()> {
        let p = &self.points[idx];
        let visible: Vec<bool> =
            self.facets.iter().map(|f| f.normal.dot(p) - f.offset > eps).collect();
        if !visible.iter().any(|&v| v) {
            return Ok(());
        }
        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, _) in self.facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..f.vertices.len() {
                let ridge: Vec<usize> = f
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &i)| i)
                    .collect();
                *ridge_count.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> =
            ridge_count.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        let mut new_facets = Vec::with_capacity(horizon.len());
        for mut ridge in horizon {
            ridge.push(idx);
            new_facets.push(self.make_facet(ridge)?);
        }
        let mut keep = visible.iter();
        self.facets.retain(|_| !*keep.next().unwrap());
        self.facets.extend(new_facets);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    /// Cone simplices `(interior, facet)` as vertex lists.
    fn cones(&self) -> impl Iterator<Item = Vec<&DVector<f64>>> + '_ {
        self.facets.iter().map(move |f| {
            let mut v = vec![&self.interior];
            v.extend(f.vertices.iter().map(|&i| &self.points[i]));
            v
        })
    }

    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let nf = factorial(n);
        self.cones()
            .map(|v| {
                let m = DMatrix::from_fn(n, n, |r, c| v[c + 1][r] - v[0][r]);
                m.determinant().abs() / nf
            })
            .sum()
    }

    pub fn moments(&self) -> PolytopeMoments {
        let n = self.dim();
        let nf = factorial(n);
        let mut volume = 0.0;
        let mut first = DVector::zeros(n);
        let mut second = DMatrix::zeros(n, n);
        for v in self.cones() {
            let m = DMatrix::from_fn(n, n, |r, c| v[c + 1][r] - v[0][r]);
            let vol = m.determinant().abs() / nf;
            let mut sum = DVector::zeros(n);
            let mut gram = DMatrix::zeros(n, n);
            for p in &v {
                sum += *p;
                gram += *p * p.transpose();
            }
            gram += &sum * sum.transpose();
            volume += vol;
            first += &sum * (vol / (n + 1) as f64);
            second += gram * (vol / ((n + 1) * (n + 2)) as f64);
        }
        PolytopeMoments { volume, first, second }
    }

    /// Facet inequalities with coplanar simplicial facets merged.
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        let scale = self.points.iter().flat_map(|p| p.iter()).fold(1e-300f64, |a, c| a.max(c.abs()));
        let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
        let mut out = Vec::new();
        for f in &self.facets {
            let mut key: Vec<i64> = f.normal.iter().map(|c| (c * 1e7).round() as i64).collect();
            key.push((f.offset / scale * 1e7).round() as i64);
            if seen.insert(key, ()).is_none() {
                out.push(Halfspace { normal: f.normal.clone(), offset: f.offset });
            }
        }
        out
    }

    /// Indices of points that are vertices of some facet, ascending.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flat_map(|f| f.vertices.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Smallest signed distance from `x` to the facet hyperplanes (positive
    /// inside).
    pub fn margin(&self, x: &DVector<f64>) -> f64 {
        self.facets.iter().map(|f| f.offset - f.normal.dot(x)).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Vec<DVector<f64>> {
        rows.iter().map(|r| DVector::from_column_slice(r)).collect()
    }

    #[test]
    fn square_with_interior_and_collinear_points() {
        let p = pts(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.5],
            &[0.5, 0.0],
            &[1.0, 0.25],
        ]);
        let h = Hull::new(&p).unwrap();
        assert!((h.volume() - 1.0).abs() < 1e-14);
        assert_eq!(h.halfspaces().len(), 4);
        let m = h.moments();
        assert!((m.first[0] - 0.5).abs() < 1e-14);
        assert!((m.second[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((m.second[(0, 1)] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cube_3d_volume_and_facets() {
        let mut p = Vec::new();
        for mask in 0..8u32 {
            p.push(DVector::from_fn(3, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }));
        }
        let h = Hull::new(&p).unwrap();
        assert!((h.volume() - 8.0).abs() < 1e-12);
        assert_eq!(h.halfspaces().len(), 6);
        assert_eq!(h.vertex_indices().len(), 8);
    }

    #[test]
    fn cube_5d_volume() {
        let n = 5;
        let p: Vec<DVector<f64>> = (0..1u32 << n)
            .map(|mask| DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { 0.5 } else { -0.5 }))
            .collect();
        let h = Hull::new(&p).unwrap();
        assert!((h.volume() - 1.0).abs() < 1e-12);
        assert_eq!(h.halfspaces().len(), 10);
    }

    #[test]
    fn flat_input_rejected() {
        let p = pts(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0]]);
        assert!(Hull::new(&p).is_err());
    }
}
