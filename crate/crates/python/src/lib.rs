//! Python bindings. Reports and results are returned as plain dicts parsed
//! from the library's JSON output.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use simplexkit::centered::CenterPolicy;
use simplexkit::enclosing::{enclose as enclose_body, EncloseOptions};
use simplexkit::harness::{self, CorpusBody, Polygon2D, SweepConfig};
use simplexkit::numeric::mahler_centered_simplex;
use simplexkit::sampling::{sample_parallel, SamplerConfig, SamplerMethod};
use simplexkit::{BodySpec, ConvexBody, GeomError};

fn err(e: GeomError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(v: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(v)
}

fn to_dict<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn sampler_config(sampler: Option<&str>) -> PyResult<SamplerConfig> {
    let method = sampler.map(|s| s.parse::<SamplerMethod>()).transpose().map_err(err)?;
    Ok(SamplerConfig { method, ..SamplerConfig::default() })
}

fn parse_policy(policy: &str, rho: Option<f64>) -> PyResult<CenterPolicy> {
    let mut p: CenterPolicy = policy.parse().map_err(err)?;
    if let (CenterPolicy::Adaptive { rho: r }, Some(v)) = (&mut p, rho) {
        *r = v;
    }
    p.validate().map_err(err)?;
    Ok(p)
}

/// A convex body with membership, support and sampling oracles.
#[pyclass(name = "Body", frozen)]
struct PyBody {
    inner: Arc<ConvexBody>,
}

impl PyBody {
    fn wrap(b: ConvexBody) -> Self {
        Self { inner: Arc::new(b) }
    }
}

#[pymethods]
impl PyBody {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = BodySpec::from_json(text).map_err(err)?;
        Ok(Self::wrap(spec.to_body().map_err(err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0))]
    fn ball(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(Self::wrap(ConvexBody::ball(dim, radius).map_err(err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, half_width = 0.5, centered = true))]
    fn cube(dim: usize, half_width: f64, centered: bool) -> PyResult<Self> {
        Ok(Self::wrap(ConvexBody::cube(dim, half_width, centered).map_err(err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0))]
    fn cross_polytope(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(Self::wrap(ConvexBody::cross_polytope(dim, radius).map_err(err)?))
    }

    #[staticmethod]
    fn vpolytope(vertices: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self::wrap(ConvexBody::vpolytope(vertices.into_iter().map(vector).collect()).map_err(err)?))
    }

    #[staticmethod]
    fn hpolytope(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> PyResult<Self> {
        let dim = normals.first().map_or(0, Vec::len);
        if normals.iter().any(|r| r.len() != dim) {
            return Err(PyValueError::new_err("normals must all have the same length"));
        }
        let a = DMatrix::from_fn(normals.len(), dim, |r, c| normals[r][c]);
        Ok(Self::wrap(ConvexBody::hpolytope(a, vector(offsets)).map_err(err)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn contains(&self, x: Vec<f64>) -> bool {
        x.len() == self.inner.dim() && self.inner.contains(&vector(x))
    }

    fn support(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.support(&vector(u)).map_err(err)
    }

    fn volume(&self) -> PyResult<f64> {
        self.inner.exact_volume().map_err(err)
    }

    fn polar(&self) -> PyResult<Self> {
        Ok(Self::wrap(self.inner.polar().map_err(err)?))
    }

    fn to_json(&self) -> String {
        BodySpec::from_body(&self.inner).to_json()
    }

    #[pyo3(signature = (count, seed = 0, sampler = None))]
    fn sample(&self, count: usize, seed: u64, sampler: Option<&str>) -> PyResult<Vec<Vec<f64>>> {
        let pts = sample_parallel(&self.inner, &sampler_config(sampler)?, seed, 0, count).map_err(err)?;
        Ok(pts.into_iter().map(|p| p.iter().copied().collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Body(kind={}, dim={})", self.inner.kind_name(), self.inner.dim())
    }
}

/// An n-simplex given by n+1 vertices.
#[pyclass(name = "Simplex", frozen)]
struct PySimplex {
    inner: simplexkit::Simplex,
}

#[pymethods]
impl PySimplex {
    #[new]
    fn new(vertices: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: simplexkit::Simplex::from_rows(&vertices).map_err(err)? })
    }

    #[staticmethod]
    fn standard_centered(n: usize) -> Self {
        Self { inner: simplexkit::Simplex::standard_centered(n) }
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn barycenter(&self) -> Vec<f64> {
        self.inner.barycenter().iter().copied().collect()
    }

    fn polar(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.polar().map_err(err)? })
    }

    fn contains_body(&self, body: &PyBody) -> PyResult<bool> {
        simplexkit::bodies::simplex_contains_body(&self.inner, &body.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Simplex(dim={})", self.inner.dim())
    }
}

/// Centered-simplex trials in the isotropic image; returns the report dict.
#[pyfunction]
#[pyo3(signature = (body, trials = 1000, seed = 0, policy = "adaptive", rho = None, sampler = None))]
fn construct<'py>(
    py: Python<'py>,
    body: &PyBody,
    trials: usize,
    seed: u64,
    policy: &str,
    rho: Option<f64>,
    sampler: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let policy = parse_policy(policy, rho)?;
    let cfg = sampler_config(sampler)?;
    let report = py
        .detach(|| harness::construct(&body.inner, trials, policy, cfg, seed, None))
        .map_err(err)?;
    to_dict(py, &report.to_json())
}

/// Enclosing simplex through the polar body; returns the result dict.
#[pyfunction]
#[pyo3(signature = (body, trials = 1000, seed = 0, policy = "adaptive", rho = None))]
fn enclose<'py>(
    py: Python<'py>,
    body: &PyBody,
    trials: usize,
    seed: u64,
    policy: &str,
    rho: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = EncloseOptions { trials, policy: parse_policy(policy, rho)?, seed, ..EncloseOptions::default() };
    let r = py.detach(|| enclose_body(&body.inner, &opts)).map_err(err)?;
    let text = serde_json::json!({
        "vertices": r.enclosing,
        "contains": r.contains,
        "ratio": r.ratio,
        "normalized": r.normalized,
        "translation": r.translation.as_slice(),
        "eqb_residual": r.audit.residual,
        "simplex_volume": r.simplex_volume,
        "body_volume": r.body_volume,
        "l_hat": r.l_hat,
    })
    .to_string();
    to_dict(py, &text)
}

/// Sweep over corpus bodies and dimensions; returns the CSV text.
#[pyfunction]
#[pyo3(signature = (dims, bodies = None, trials = 200, seed = 0))]
fn sweep(py: Python<'_>, dims: Vec<usize>, bodies: Option<Vec<String>>, trials: usize, seed: u64) -> PyResult<String> {
    let corpus = match bodies {
        Some(b) => b.iter().map(|s| s.parse::<CorpusBody>()).collect::<Result<Vec<_>, _>>().map_err(err)?,
        None => CorpusBody::ALL.to_vec(),
    };
    let config = SweepConfig {
        dims,
        corpus,
        trials,
        seed,
        policy: CenterPolicy::default(),
        sampler: SamplerConfig::default(),
    };
    Ok(py.detach(|| harness::sweep(&config, None)).map_err(err)?.to_csv())
}

/// `(vol_simplex, vol_ball, normalized_ratio)` for the unit ball.
#[pyfunction]
fn reference_ball(n: usize) -> PyResult<(f64, f64, f64)> {
    let r = harness::reference_ball(n).map_err(err)?;
    Ok((r.vol_simplex, r.vol_ball, r.normalized_ratio))
}

#[pyfunction]
fn reference_cube(n: usize) -> PyResult<f64> {
    Ok(harness::reference_cube(n).map_err(err)?.normalized_ratio_bound)
}

/// Minimal-area triangle around a convex polygon given counterclockwise.
#[pyfunction]
fn min_enclosing_triangle(vertices: Vec<[f64; 2]>) -> PyResult<Vec<Vec<f64>>> {
    let p = Polygon2D::new(vertices).map_err(err)?;
    Ok(harness::min_enclosing_triangle(&p).map_err(err)?.to_rows())
}

#[pyfunction]
fn mahler_product(n: usize) -> f64 {
    mahler_centered_simplex(n)
}

#[pymodule]
fn pysimplexkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBody>()?;
    m.add_class::<PySimplex>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(enclose, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(reference_ball, m)?)?;
    m.add_function(wrap_pyfunction!(reference_cube, m)?)?;
    m.add_function(wrap_pyfunction!(min_enclosing_triangle, m)?)?;
    m.add_function(wrap_pyfunction!(mahler_product, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
