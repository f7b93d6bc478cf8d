//! JSON body specification:
//!
//! ```json
//! {"kind": "ball", "dim": 3, "radius": 1.0}
//! {"kind": "cube", "dim": 3, "half_width": 0.5, "centered": false}
//! {"kind": "ellipsoid", "dim": 2, "shape": [[4, 0], [0, 1]]}
//! {"kind": "vpolytope", "dim": 2, "vertices": [[1, 0], [0, 1], [-1, -1]]}
//! {"kind": "hpolytope", "dim": 1, "normals": [[1], [-1]], "offsets": [1, 1]}
//! {"kind": "simplex", "dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]]}
//! ```
//!
//! `shape` is accepted either as a list of rows or as a flat row-major list.
//! Balls and ellipsoids take an optional `center`; cubes default to centered.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BodyKind, ConvexBody, Simplex};
use crate::error::{GeomError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixSpec {
    fn to_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            MatrixSpec::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(GeomError::Spec(format!("shape must be {n}x{n}")));
                }
                Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
            }
            MatrixSpec::Flat(v) => {
                if v.len() != n * n {
                    return Err(GeomError::Spec(format!("shape must have {} entries", n * n)));
                }
                Ok(DMatrix::from_row_slice(n, n, v))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centered: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
}

fn need<T: Clone>(field: &Option<T>, name: &str, kind: &str) -> Result<T> {
    field.clone().ok_or_else(|| GeomError::Spec(format!("{kind} requires \"{name}\"")))
}

fn check_len(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(GeomError::Spec(format!("{what} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

fn to_points(rows: &[Vec<f64>], n: usize) -> Result<Vec<DVector<f64>>> {
    rows.iter()
        .map(|r| {
            check_len(r, n, "vertex")?;
            Ok(DVector::from_column_slice(r))
        })
        .collect()
}

impl BodySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GeomError::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("body spec serializes")
    }

    fn empty(kind: &str, dim: usize) -> Self {
        Self {
            kind: kind.into(),
            dim,
            radius: None,
            half_width: None,
            centered: None,
            center: None,
            shape: None,
            vertices: None,
            normals: None,
            offsets: None,
        }
    }

    pub fn to_body(&self) -> Result<ConvexBody> {
        let n = self.dim;
        if n == 0 {
            return Err(GeomError::Spec("dim must be positive".into()));
        }
        let center = match &self.center {
            Some(c) => {
                check_len(c, n, "center")?;
                DVector::from_column_slice(c)
            }
            None => DVector::zeros(n),
        };
        let kind = self.kind.as_str();
        match kind {
            "ball" => ConvexBody::ball_at(center, need(&self.radius, "radius", kind)?),
            "cube" => ConvexBody::cube(
                n,
                need(&self.half_width, "half_width", kind)?,
                self.centered.unwrap_or(true),
            ),
            "ellipsoid" => {
                let shape = need(&self.shape, "shape", kind)?.to_matrix(n)?;
                ConvexBody::ellipsoid(shape, center)
            }
            "vpolytope" => ConvexBody::vpolytope(to_points(&need(&self.vertices, "vertices", kind)?, n)?),
            "simplex" => {
                let v = to_points(&need(&self.vertices, "vertices", kind)?, n)?;
                if v.len() != n + 1 {
                    return Err(GeomError::Spec(format!("simplex needs {} vertices", n + 1)));
                }
                Ok(ConvexBody::simplex(Simplex::new(v)?))
            }
            "hpolytope" => {
                let rows = need(&self.normals, "normals", kind)?;
                let offsets = need(&self.offsets, "offsets", kind)?;
                if rows.len() != offsets.len() {
                    return Err(GeomError::Spec("normals and offsets differ in length".into()));
                }
                for r in &rows {
                    check_len(r, n, "normal")?;
                }
                let normals = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
                ConvexBody::hpolytope(normals, DVector::from_vec(offsets))
            }
            other => Err(GeomError::Spec(format!("unknown body kind \"{other}\""))),
        }
    }

    pub fn from_body(body: &ConvexBody) -> Self {
        let n = body.dim();
        let mut s = Self::empty(body.kind_name(), n);
        let rows = |pts: &[DVector<f64>]| -> Vec<Vec<f64>> {
            pts.iter().map(|p| p.iter().copied().collect()).collect()
        };
        let opt_center = |c: &DVector<f64>| {
            if c.amax() == 0.0 {
                None
            } else {
                Some(c.iter().copied().collect())
            }
        };
        match body.kind() {
            BodyKind::Ball { radius, center } => {
                s.radius = Some(*radius);
                s.center = opt_center(center);
            }
            BodyKind::Cube { half_width, centered } => {
                s.half_width = Some(*half_width);
                s.centered = Some(*centered);
            }
            BodyKind::Ellipsoid { shape, center } => {
                s.shape = Some(MatrixSpec::Rows(
                    (0..n).map(|r| (0..n).map(|c| shape[(r, c)]).collect()).collect(),
                ));
                s.center = opt_center(center);
            }
            BodyKind::VPolytope { vertices } => s.vertices = Some(rows(vertices)),
            BodyKind::Simplex(simplex) => s.vertices = Some(rows(simplex.vertices())),
            BodyKind::HPolytope { normals, offsets } => {
                s.normals = Some(
                    (0..normals.nrows())
                        .map(|r| normals.row(r).iter().copied().collect())
                        .collect(),
                );
                s.offsets = Some(offsets.iter().copied().collect());
            }
        }
        s
    }
}
