//! Minimal-area triangle around a convex polygon.
//!
//! A triangle is described by the outward normal angles of its three
//! sides; each side lies on the supporting line of the polygon in that
//! direction. Some optimal triangle has a side flush with a polygon edge,
//! so every edge is tried as the fixed side, the other two angles are
//! located on a grid and refined, and the best candidate gets a final
//! pattern search over all three angles.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bodies::Simplex;
use crate::error::{GeomError, Result};

const GRID: usize = 96;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2D {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polygon2D {
    /// Counterclockwise, strictly convex vertex list.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(GeomError::InvalidPolygon(format!("need at least 3 vertices, got {m}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidPolygon("non-finite coordinate".into()));
        }
        for i in 0..m {
            let c = cross(vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m]);
            if !(c > 0.0) {
                return Err(GeomError::InvalidPolygon(format!(
                    "vertices must be strictly convex and counterclockwise (turn at {} is {c})",
                    (i + 1) % m
                )));
            }
        }
        let p = Self { vertices };
        // a star-shaped winding passes the turn test; reject total turning ≠ 2π
        if !(p.area() > 0.0) || p.winding() != 1 {
            return Err(GeomError::InvalidPolygon("polygon winds more than once".into()));
        }
        Ok(p)
    }

    /// Convex hull of a point set (monotone chain; collinear points dropped).
    pub fn hull_of(points: &[[f64; 2]]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        if pts.len() < 3 {
            return Err(GeomError::InvalidPolygon("fewer than 3 distinct points".into()));
        }
        let mut lower: Vec<[f64; 2]> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<[f64; 2]> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self::new(lower)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let m = self.vertices.len();
        0.5 * (0..m)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % m]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    fn winding(&self) -> i32 {
        let m = self.vertices.len();
        let total: f64 = (0..m)
            .map(|i| {
                let (a, b, c) = (self.vertices[i], self.vertices[(i + 1) % m], self.vertices[(i + 2) % m]);
                let d1 = (b[1] - a[1]).atan2(b[0] - a[0]);
                let d2 = (c[1] - b[1]).atan2(c[0] - b[0]);
                let mut turn = d2 - d1;
                while turn <= -PI {
                    turn += 2.0 * PI;
                }
                while turn > PI {
                    turn -= 2.0 * PI;
                }
                turn
            })
            .sum();
        (total / (2.0 * PI)).round() as i32
    }

    pub fn support(&self, theta: f64) -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        self.vertices.iter().map(|v| v[0] * c + v[1] * s).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Outward normal angle of edge `i → i+1`.
    fn edge_normal_angle(&self, i: usize) -> f64 {
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % self.vertices.len()];
        (-(b[0] - a[0])).atan2(b[1] - a[1])
    }
}

fn line_intersection(t1: f64, h1: f64, t2: f64, h2: f64) -> Option<[f64; 2]> {
    let (a, b, c, d) = (t1.cos(), t1.sin(), t2.cos(), t2.sin());
    let det = a * d - b * c;
    if det.abs() < 1e-14 {
        return None;
    }
    Some([(h1 * d - b * h2) / det, (a * h2 - h1 * c) / det])
}

/// Triangle bounded by the supporting lines at the three normal angles, or
/// `None` when the normals do not positively span the plane.
fn triangle_from_angles(p: &Polygon2D, angles: [f64; 3]) -> Option<[[f64; 2]; 3]> {
    let mut t = angles.map(|a| a.rem_euclid(2.0 * PI));
    t.sort_by(f64::total_cmp);
    let gaps = [t[1] - t[0], t[2] - t[1], 2.0 * PI - (t[2] - t[0])];
    if gaps.iter().any(|&g| g >= PI - 1e-12 || g <= 1e-12) {
        return None;
    }
    let h = t.map(|a| p.support(a));
    Some([
        line_intersection(t[0], h[0], t[1], h[1])?,
        line_intersection(t[1], h[1], t[2], h[2])?,
        line_intersection(t[2], h[2], t[0], h[0])?,
    ])
}

fn triangle_area(p: &Polygon2D, angles: [f64; 3]) -> f64 {
    match triangle_from_angles(p, angles) {
        Some([a, b, c]) => 0.5 * cross(a, b, c).abs(),
        None => f64::INFINITY,
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Compass search over all three angles, including pairwise diagonal moves
/// so that kinks of the piecewise-smooth area do not stall it.
fn pattern_search(p: &Polygon2D, mut x: [f64; 3], mut fx: f64, mut step: f64) -> ([f64; 3], f64) {
    let mut dirs: Vec<[f64; 3]> = Vec::new();
    for i in 0..3 {
        let mut d = [0.0; 3];
        d[i] = 1.0;
        dirs.push(d);
        for j in i + 1..3 {
            for s in [1.0, -1.0] {
                let mut d = [0.0; 3];
                d[i] = 1.0;
                d[j] = s;
                dirs.push(d);
            }
        }
    }
    while step > 1e-13 {
        let mut improved = false;
        for d in &dirs {
            for sign in [1.0, -1.0] {
                let y = [x[0] + sign * step * d[0], x[1] + sign * step * d[1], x[2] + sign * step * d[2]];
                let fy = triangle_area(p, y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Minimal-area enclosing triangle, as a 2-simplex.
pub fn min_enclosing_triangle(p: &Polygon2D) -> Result<Simplex> {
    let m = p.vertices().len();
    let mut best = ([0.0; 3], f64::INFINITY);
    let step = PI / GRID as f64;
    for edge in 0..m {
        let t1 = p.edge_normal_angle(edge);
        let area = |a: f64, b: f64| triangle_area(p, [t1, t1 + a, t1 + a + b]);
        // α, β ∈ (0, π) with α + β > π keeps all three gaps below π
        let mut local = (0.0, 0.0, f64::INFINITY);
        for i in 1..GRID {
            for j in 1..GRID {
                let (a, b) = (i as f64 * step, j as f64 * step);
                let f = area(a, b);
                if f < local.2 {
                    local = (a, b, f);
                }
            }
        }
        if !local.2.is_finite() {
            continue;
        }
        let (mut a, mut b, mut f) = local;
        let mut bracket = step;
        for _ in 0..60 {
            let (na, _) = golden_section(|x| area(x, b), (a - bracket).max(0.0), (a + bracket).min(PI), 1e-13);
            let (nb, nf) = golden_section(|y| area(na, y), (b - bracket).max(0.0), (b + bracket).min(PI), 1e-13);
            let done = (f - nf).abs() <= 1e-15 * f;
            if nf <= f {
                a = na;
                b = nb;
                f = nf;
            }
            if done {
                break;
            }
            bracket = (bracket * 0.7).max(1e-6);
        }
        if f < best.1 {
            best = ([t1, t1 + a, t1 + a + b], f);
        }
    }
    if !best.1.is_finite() {
        return Err(GeomError::InvalidPolygon("no bounded enclosing triangle found".into()));
    }
    let (angles, _) = pattern_search(p, best.0, best.1, step);
    let tri = triangle_from_angles(p, angles).ok_or_else(|| GeomError::Internal("triangle vanished".into()))?;
    Simplex::new(tri.iter().map(|v| DVector::from_column_slice(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{simplex_contains_body, ConvexBody};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn as_body(p: &Polygon2D) -> ConvexBody {
        ConvexBody::vpolytope(p.vertices().iter().map(|v| DVector::from_column_slice(v)).collect()).unwrap()
    }

    #[test]
    fn unit_square_needs_area_two() {
        let sq = Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let t = min_enclosing_triangle(&sq).unwrap();
        assert!((t.volume() - 2.0).abs() < 1e-6 * 2.0);
        assert!(simplex_contains_body(&t, &as_body(&sq)).unwrap());
    }

    #[test]
    fn regular_hexagon_ratio_three_halves() {
        let verts: Vec<[f64; 2]> = (0..6).map(|k| {
            let a = k as f64 * PI / 3.0;
            [a.cos(), a.sin()]
        }).collect();
        let hex = Polygon2D::new(verts).unwrap();
        let t = min_enclosing_triangle(&hex).unwrap();
        let ratio = t.volume() / hex.area();
        assert!((ratio - 1.5).abs() < 1e-6 * 1.5, "{ratio}");
        assert!(ratio < 2.0);
    }

    #[test]
    fn triangle_is_its_own_answer() {
        let tri = Polygon2D::new(vec![[0.0, 0.0], [3.0, 0.5], [1.0, 2.0]]).unwrap();
        let t = min_enclosing_triangle(&tri).unwrap();
        assert!((t.volume() / tri.area() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn area_at_most_twice_on_random_polygons() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let k = rng.random_range(3..15);
            let pts: Vec<[f64; 2]> = (0..k).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let Ok(p) = Polygon2D::hull_of(&pts) else { continue };
            let t = min_enclosing_triangle(&p).unwrap();
            assert!(t.volume() <= 2.0 * p.area() + 1e-6);
            assert!(simplex_contains_body(&t, &as_body(&p)).unwrap());
        }
    }

    #[test]
    fn invalid_polygons_rejected() {
        assert!(Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        // clockwise
        assert!(Polygon2D::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        // collinear vertex
        assert!(Polygon2D::new(vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        // pentagram winds twice
        let star: Vec<[f64; 2]> = (0..5).map(|k| {
            let a = k as f64 * 4.0 * PI / 5.0;
            [a.cos(), a.sin()]
        }).collect();
        assert!(Polygon2D::new(star).is_err());
        assert!(Polygon2D::hull_of(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
    }
}
