//! Experiment orchestration: the body corpus, construction reports with
//! self-consistency checks, and dimension sweeps written as CSV.

mod reference;
mod triangle;

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodySpec, ConvexBody};
use crate::centered::{run_trials, summarize, CenterPolicy, TrialOptions, TrialRecord, TrialSummary};
use crate::enclosing::{enclose, EncloseOptions, CENTER_MAX_ITERS};
use crate::error::{GeomError, Result};
use crate::isotropy::{default_sample_count, estimate_moments, isotropic_transform, IsotropyOptions};
use crate::sampling::{stream_rng, stream_seed, SamplerConfig};

pub use reference::{reference_ball, reference_cube, BallReference, CubeReference, PARALLELEPIPED_RATIO_3D};
pub use triangle::{min_enclosing_triangle, Polygon2D};

pub const REPORT_SCHEMA: &str = "construct-report-v1";
pub const SWEEP_SCHEMA: &str = "sweep-v1";
pub const SWEEP_COLUMNS: [&str; 7] =
    ["n", "body", "success_rate", "c1_quantile", "c2_quantile", "normalized_ratio", "eqb_residual"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// Set only when the caller supplies one, so reruns are byte-identical.
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new(timestamp: Option<String>) -> Self {
        Self { version: env!("CARGO_PKG_VERSION").to_string(), timestamp }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub seed: u64,
    pub trials: usize,
    pub policy: CenterPolicy,
    pub sampler: SamplerConfig,
    pub body: BodySpec,
}

/// Isotropic normalization diagnostics echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub l_hat: f64,
    pub l_hat_std_error: f64,
    pub cov_residual: f64,
    pub residual_tolerance: f64,
    pub sample_count: usize,
    pub moment_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ReportConfig,
    pub model: ModelSummary,
    pub records: Vec<TrialRecord>,
    pub aggregates: TrialSummary,
    pub provenance: Provenance,
}

impl ExperimentReport {
    /// Recomputes the aggregates from the per-trial records.
    pub fn check_consistency(&self) -> Result<()> {
        let again = summarize(&self.records, self.model.l_hat, self.config.body.dim);
        if again != self.aggregates {
            return Err(GeomError::Spec("report aggregates disagree with its trial records".into()));
        }
        if !(0.0..=1.0).contains(&self.aggregates.success_rate) {
            return Err(GeomError::Spec("success rate outside [0, 1]".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses a report and checks its aggregates.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| GeomError::Spec(e.to_string()))?;
        if r.schema != REPORT_SCHEMA {
            return Err(GeomError::Spec(format!("unsupported report schema \"{}\"", r.schema)));
        }
        r.check_consistency()?;
        Ok(r)
    }
}

/// Normalizes `body` to isotropic position and runs centered-simplex trials
/// on the image.
pub fn construct(
    body: &ConvexBody,
    trials: usize,
    policy: CenterPolicy,
    sampler: SamplerConfig,
    seed: u64,
    timestamp: Option<String>,
) -> Result<ExperimentReport> {
    let n = body.dim();
    let shared = Arc::new(body.clone());
    let moments = estimate_moments(&shared, &sampler, seed, default_sample_count(n))?;
    let model = isotropic_transform(body, &moments, &IsotropyOptions { sampler, seed, samples: None })?;
    let image = Arc::new(model.image(body)?);
    let run = run_trials(&image, &model, &TrialOptions { trials, policy, sampler, seed })?;
    Ok(ExperimentReport {
        schema: REPORT_SCHEMA.into(),
        config: ReportConfig { seed, trials, policy, sampler, body: BodySpec::from_body(body) },
        model: ModelSummary {
            l_hat: model.l_hat,
            l_hat_std_error: model.l_hat_std_error,
            cov_residual: model.cov_residual,
            residual_tolerance: model.residual_tolerance(),
            sample_count: model.sample_count,
            moment_samples: model.moment_samples,
        },
        records: run.records,
        aggregates: run.summary,
        provenance: Provenance::new(timestamp),
    })
}

/// Bodies of the default sweep corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusBody {
    Ball,
    Cube,
    CrossPolytope,
    RandomVPolytope,
    RandomHPolytope,
    CenteredSimplex,
}

impl CorpusBody {
    pub const ALL: [CorpusBody; 6] = [
        CorpusBody::Ball,
        CorpusBody::Cube,
        CorpusBody::CrossPolytope,
        CorpusBody::RandomVPolytope,
        CorpusBody::RandomHPolytope,
        CorpusBody::CenteredSimplex,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CorpusBody::Ball => "ball",
            CorpusBody::Cube => "cube",
            CorpusBody::CrossPolytope => "cross-polytope",
            CorpusBody::RandomVPolytope => "random-vpolytope",
            CorpusBody::RandomHPolytope => "random-hpolytope",
            CorpusBody::CenteredSimplex => "centered-simplex",
        }
    }

    /// The body in dimension `n`. Random members are drawn from a stream of
    /// `seed` keyed by kind and dimension.
    pub fn build(&self, n: usize, seed: u64) -> Result<ConvexBody> {
        let key = ((*self as u64) << 32) | n as u64;
        let mut rng = stream_rng(seed, key);
        match self {
            CorpusBody::Ball => ConvexBody::ball(n, 1.0),
            CorpusBody::Cube => ConvexBody::cube(n, 0.5, true),
            CorpusBody::CrossPolytope => ConvexBody::cross_polytope(n, 1.0),
            CorpusBody::CenteredSimplex => Ok(ConvexBody::simplex(crate::Simplex::standard_centered(n))),
            CorpusBody::RandomVPolytope => {
                // 2n+4 Gaussian points, translated so the hull's barycenter is 0
                let pts: Vec<DVector<f64>> =
                    (0..2 * n + 4).map(|_| DVector::from_fn(n, |_, _| rng.sample(StandardNormal))).collect();
                let body = ConvexBody::vpolytope(pts)?;
                let b = body.exact_moments()?.barycenter;
                body.translate(&-b)
            }
            CorpusBody::RandomHPolytope => {
                // 3n random unit normals with unit offsets, redrawn until bounded
                for _ in 0..1000 {
                    let m = 3 * n;
                    let mut normals = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
                    for mut row in normals.row_iter_mut() {
                        let len = row.norm();
                        row /= len;
                    }
                    if let Ok(body) = ConvexBody::hpolytope(normals, DVector::from_element(m, 1.0)) {
                        return Ok(body);
                    }
                }
                Err(GeomError::ConstructionFailed { trials: 1000 })
            }
        }
    }
}

impl FromStr for CorpusBody {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        CorpusBody::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| GeomError::Spec(format!("unknown corpus body \"{s}\"")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub corpus: Vec<CorpusBody>,
    pub trials: usize,
    pub seed: u64,
    pub policy: CenterPolicy,
    pub sampler: SamplerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub body: CorpusBody,
    pub success_rate: f64,
    pub c1_quantile: f64,
    pub c2_quantile: f64,
    pub normalized_ratio: f64,
    pub eqb_residual: f64,
    /// Failure of this cell; its numeric columns are NaN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: String,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

fn sweep_cell(config: &SweepConfig, body: CorpusBody, n: usize) -> SweepRow {
    let seed = stream_seed(config.seed, ((body as u64) << 32) | n as u64);
    let mut row = SweepRow {
        n,
        body,
        success_rate: f64::NAN,
        c1_quantile: f64::NAN,
        c2_quantile: f64::NAN,
        normalized_ratio: f64::NAN,
        eqb_residual: f64::NAN,
        error: None,
    };
    let result = (|| -> Result<()> {
        let k = body.build(n, config.seed)?;
        let report = construct(&k, config.trials, config.policy, config.sampler, seed, None)?;
        row.success_rate = report.aggregates.success_rate;
        row.c1_quantile = report.aggregates.c1_quantile.unwrap_or(f64::NAN);
        row.c2_quantile = report.aggregates.c2_quantile.unwrap_or(f64::NAN);
        let enc = enclose(
            &k,
            &EncloseOptions {
                trials: config.trials,
                policy: config.policy,
                sampler: config.sampler,
                seed,
                center_iters: CENTER_MAX_ITERS,
            },
        )?;
        row.normalized_ratio = enc.normalized;
        row.eqb_residual = enc.audit.residual;
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Runs every (body, n) cell; failures are recorded per cell. Rows are
/// ordered by body, then dimension.
pub fn sweep(config: &SweepConfig, timestamp: Option<String>) -> Result<SweepReport> {
    if config.corpus.is_empty() || config.dims.is_empty() {
        return Err(GeomError::Spec("sweep needs at least one body and one dimension".into()));
    }
    let mut cells: Vec<(CorpusBody, usize)> =
        config.corpus.iter().flat_map(|&b| config.dims.iter().map(move |&n| (b, n))).collect();
    cells.sort();
    cells.dedup();
    let rows: Vec<SweepRow> = cells.par_iter().map(|&(b, n)| sweep_cell(config, b, n)).collect();
    Ok(SweepReport { schema: SWEEP_SCHEMA.into(), config: config.clone(), rows, provenance: Provenance::new(timestamp) })
}

/// 17 significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepReport {
    /// CSV with a schema line, a header and one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: {}\n{}\n", self.schema, SWEEP_COLUMNS.join(","));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                r.body.name(),
                fmt_f64(r.success_rate),
                fmt_f64(r.c1_quantile),
                fmt_f64(r.c2_quantile),
                fmt_f64(r.normalized_ratio),
                fmt_f64(r.eqb_residual)
            );
        }
        out
    }
}
