//! Random simplices `S(0, X₁, …, Xₙ)` in an isotropic body, slid by a
//! homothety so that their barycenter is exactly the origin.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{ConvexBody, Simplex};
use crate::error::{GeomError, Result};
use crate::isotropy::{kls_inradius, IsotropicModel};
use crate::numeric::quantile_sorted;
use crate::sampling::{SamplerConfig, SamplerHandle};

/// Trials sharing one sampler stream. Fixed so results do not depend on
/// the thread count.
pub const TRIAL_BLOCK: usize = 64;
/// Dimension at which the tail constants are calibrated.
pub const CALIBRATION_DIM: usize = 5;

/// How the homothety center `w = −u/c` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CenterPolicy {
    /// `w = −ρ·r·u/|u|` with `r` the KLS inradius: the largest ratio for
    /// which `w` is guaranteed to lie in the body (for `ρ ≤ 1`).
    Adaptive { rho: f64 },
    /// `w = −u/c₁`, ratio `1/(1+c₁)` for every trial.
    Fixed { c1: f64 },
}

impl Default for CenterPolicy {
    fn default() -> Self {
        CenterPolicy::Adaptive { rho: 1.0 }
    }
}

impl CenterPolicy {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            CenterPolicy::Adaptive { rho } => ("rho", rho),
            CenterPolicy::Fixed { c1 } => ("c1", c1),
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(GeomError::Spec(format!("{name} must be positive, got {v}")))
        }
    }
}

impl fmt::Display for CenterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterPolicy::Adaptive { .. } => f.write_str("adaptive"),
            CenterPolicy::Fixed { c1 } => write!(f, "fixed:{c1}"),
        }
    }
}

/// Parses `adaptive` (ρ = 1) or `fixed:C1`.
impl FromStr for CenterPolicy {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let policy = if s == "adaptive" {
            CenterPolicy::Adaptive { rho: 1.0 }
        } else if let Some(c) = s.strip_prefix("fixed:") {
            let c1 = c.parse().map_err(|_| GeomError::Spec(format!("bad constant in \"{s}\"")))?;
            CenterPolicy::Fixed { c1 }
        } else {
            return Err(GeomError::Spec(format!("unknown policy \"{s}\" (adaptive or fixed:C1)")));
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteredSimplexTrial {
    pub raw: Simplex,
    /// Barycenter of `raw`.
    pub u: DVector<f64>,
    /// Homothety center.
    pub w: DVector<f64>,
    pub c_eff: f64,
    pub lambda: f64,
    pub result: Simplex,
    pub inside: bool,
    pub raw_volume: f64,
    pub result_volume: f64,
}

/// `S(0, X₁, …, Xₙ)`; degenerate point sets are rejected.
pub fn build_raw(points: &[DVector<f64>]) -> Result<Simplex> {
    let n = points.first().map(|p| p.len()).unwrap_or(0);
    if points.len() != n || n == 0 {
        return Err(GeomError::DimensionMismatch { expected: n, got: points.len() });
    }
    let mut v = Vec::with_capacity(n + 1);
    v.push(DVector::zeros(n));
    v.extend(points.iter().cloned());
    Simplex::new(v)
}

/// Applies the homothety with ratio `λ = 1/(1+c)` and center `w = −u/c`,
/// which maps vertex `vᵢ` to `λ(vᵢ − u)`. `inside` is left false until
/// [`certify_inside`] runs.
pub fn recenter(raw: &Simplex, l_hat: f64, policy: &CenterPolicy) -> Result<CenteredSimplexTrial> {
    if !(l_hat > 0.0) {
        return Err(GeomError::Spec(format!("l_hat must be positive, got {l_hat}")));
    }
    policy.validate()?;
    let n = raw.dim();
    let u = raw.barycenter();
    let u_norm = u.norm();
    let raw_volume = raw.volume();
    if u_norm == 0.0 {
        return Ok(CenteredSimplexTrial {
            raw: raw.clone(),
            w: u.clone(),
            u,
            c_eff: 0.0,
            lambda: 1.0,
            result: raw.clone(),
            inside: false,
            raw_volume,
            result_volume: raw_volume,
        });
    }
    let c_eff = match *policy {
        CenterPolicy::Adaptive { rho } => u_norm / (rho * kls_inradius(l_hat, n)),
        CenterPolicy::Fixed { c1 } => c1,
    };
    let lambda = 1.0 / (1.0 + c_eff);
    let w = &u * (-1.0 / c_eff);
    let result = Simplex::new_unchecked(raw.vertices().iter().map(|v| (v - &u) * lambda).collect())?;
    let result_volume = result.volume();
    Ok(CenteredSimplexTrial { raw: raw.clone(), u, w, c_eff, lambda, result, inside: false, raw_volume, result_volume })
}

/// Vertexwise membership of the recentered simplex, which suffices by
/// convexity. Stores and returns the flag.
pub fn certify_inside(trial: &mut CenteredSimplexTrial, body: &ConvexBody) -> bool {
    trial.inside = trial.result.vertices().iter().all(|v| body.contains(v));
    trial.inside
}

/// Per-trial summary kept for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub degenerate: bool,
    /// Sampler failure, if any; the trial then counts as failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub u_norm: f64,
    pub raw_volume: f64,
    /// 0 when no homothety was applied (degenerate or failed trial).
    pub lambda: f64,
    pub result_volume: f64,
    pub inside: bool,
    /// `|Σ result vertices|` relative to the largest vertex norm.
    pub centering_error: f64,
}

impl TrialRecord {
    pub fn success(&self) -> bool {
        self.inside && !self.degenerate && self.error.is_none()
    }

    /// `|u|/l_hat`: the smallest `c` with `|u| ≤ c·l_hat`.
    pub fn c1_statistic(&self, l_hat: f64) -> f64 {
        self.u_norm / l_hat
    }

    /// `raw_volume^{1/n}·√n/l_hat`.
    pub fn c2_statistic(&self, l_hat: f64, n: usize) -> f64 {
        volume_statistic(self.raw_volume, l_hat, n)
    }
}

pub fn volume_statistic(volume: f64, l_hat: f64, n: usize) -> f64 {
    if volume <= 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    (volume.ln() / nf + 0.5 * nf.ln() - l_hat.ln()).exp()
}

/// Tail level `e^{−n}/2` used by the calibration protocol.
pub fn tail_level(n: usize) -> f64 {
    (-(n as f64)).exp() / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub dim: usize,
    pub l_hat: f64,
    pub trials: usize,
    pub successes: usize,
    pub degenerate: usize,
    pub failed_samples: usize,
    pub success_rate: f64,
    /// Upper `e^{−n}/2` quantile of `|u|/l_hat`.
    pub c1_quantile: Option<f64>,
    pub c1_median: Option<f64>,
    /// Median of `|u|·(n+1)/l_hat`.
    pub scaled_u_median: Option<f64>,
    /// Lower `e^{−n}/2` quantile of `raw_volume^{1/n}·√n/l_hat`.
    pub c2_quantile: Option<f64>,
    pub c2_median: Option<f64>,
    /// Median of `result_volume^{1/n}·√n/l_hat` over successful trials.
    pub result_volume_median: Option<f64>,
    pub max_centering_error: f64,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn quantile(v: &[f64], p: f64) -> Option<f64> {
    (!v.is_empty()).then(|| quantile_sorted(v, p))
}

/// Aggregates recomputed from per-trial records only.
pub fn summarize(records: &[TrialRecord], l_hat: f64, n: usize) -> TrialSummary {
    let trials = records.len();
    let successes = records.iter().filter(|r| r.success()).count();
    let p = tail_level(n);
    let sampled: Vec<&TrialRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let c1 = sorted(sampled.iter().map(|r| r.c1_statistic(l_hat)).collect());
    let c2 = sorted(sampled.iter().map(|r| r.c2_statistic(l_hat, n)).collect());
    let result_vol = sorted(
        records.iter().filter(|r| r.success()).map(|r| volume_statistic(r.result_volume, l_hat, n)).collect(),
    );
    let scaled: Vec<f64> = c1.iter().map(|c| c * (n + 1) as f64).collect();
    TrialSummary {
        dim: n,
        l_hat,
        trials,
        successes,
        degenerate: records.iter().filter(|r| r.degenerate).count(),
        failed_samples: trials - sampled.len(),
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        c1_quantile: quantile(&c1, 1.0 - p),
        c1_median: quantile(&c1, 0.5),
        scaled_u_median: quantile(&scaled, 0.5),
        c2_quantile: quantile(&c2, p),
        c2_median: quantile(&c2, 0.5),
        result_volume_median: quantile(&result_vol, 0.5),
        max_centering_error: records.iter().map(|r| r.centering_error).fold(0.0, f64::max),
    }
}

/// Fractions of trials with `|u| ≤ c₁·l_hat` and with
/// `raw_volume^{1/n}·√n/l_hat ≥ c₂`.
pub fn tail_fractions(records: &[TrialRecord], l_hat: f64, n: usize, c1: f64, c2: f64) -> (f64, f64) {
    let total = records.len().max(1) as f64;
    let a = records.iter().filter(|r| r.error.is_none() && r.c1_statistic(l_hat) <= c1).count();
    let b = records.iter().filter(|r| r.error.is_none() && r.c2_statistic(l_hat, n) >= c2).count();
    (a as f64 / total, b as f64 / total)
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub records: Vec<TrialRecord>,
    pub summary: TrialSummary,
    /// Largest-volume trial certified inside the body.
    pub best: Option<CenteredSimplexTrial>,
}

#[derive(Debug, Clone, Copy)]
pub struct TrialOptions {
    pub trials: usize,
    pub policy: CenterPolicy,
    pub sampler: SamplerConfig,
    pub seed: u64,
}

fn run_one(
    index: usize,
    handle: &mut SamplerHandle,
    body: &ConvexBody,
    l_hat: f64,
    policy: &CenterPolicy,
) -> (TrialRecord, Option<CenteredSimplexTrial>) {
    let n = body.dim();
    let mut record = TrialRecord {
        index,
        degenerate: false,
        error: None,
        u_norm: 0.0,
        raw_volume: 0.0,
        lambda: 0.0,
        result_volume: 0.0,
        inside: false,
        centering_error: 0.0,
    };
    let points = match handle.sample(n) {
        Ok(p) => p,
        Err(e) => {
            record.error = Some(e.to_string());
            return (record, None);
        }
    };
    let raw = match build_raw(&points) {
        Ok(s) => s,
        Err(_) => {
            // kept for the |u| statistic; the trial counts as failed
            record.degenerate = true;
            let u = points.iter().fold(DVector::zeros(n), |a, p| a + p) / (n + 1) as f64;
            record.u_norm = u.norm();
            return (record, None);
        }
    };
    let mut trial = match recenter(&raw, l_hat, policy) {
        Ok(t) => t,
        Err(e) => {
            record.error = Some(e.to_string());
            return (record, None);
        }
    };
    certify_inside(&mut trial, body);
    let sum = trial.result.vertices().iter().fold(DVector::zeros(n), |a, v| a + v);
    record.u_norm = trial.u.norm();
    record.raw_volume = trial.raw_volume;
    record.lambda = trial.lambda;
    record.result_volume = trial.result_volume;
    record.inside = trial.inside;
    record.centering_error = sum.norm() / trial.result.max_vertex_norm();
    (record, Some(trial))
}

/// Independent trials on the isotropic image `body` of a model. Trial `i`
/// draws its points from stream `i / TRIAL_BLOCK` of the master seed.
pub fn run_trials(body: &Arc<ConvexBody>, model: &IsotropicModel, options: &TrialOptions) -> Result<TrialRun> {
    run_trials_with_l_hat(body, model.l_hat, options)
}

pub fn run_trials_with_l_hat(body: &Arc<ConvexBody>, l_hat: f64, options: &TrialOptions) -> Result<TrialRun> {
    if options.trials == 0 {
        return Err(GeomError::Spec("trials must be at least 1".into()));
    }
    options.policy.validate()?;
    let n = body.dim();
    let blocks = options.trials.div_ceil(TRIAL_BLOCK);
    type Block = (Vec<TrialRecord>, Option<CenteredSimplexTrial>);
    let parts: Result<Vec<Block>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut handle = SamplerHandle::for_stream(body.clone(), &options.sampler, options.seed, b as u64)?;
            let start = b * TRIAL_BLOCK;
            let end = (start + TRIAL_BLOCK).min(options.trials);
            let mut records = Vec::with_capacity(end - start);
            let mut best: Option<CenteredSimplexTrial> = None;
            for i in start..end {
                let (rec, trial) = run_one(i, &mut handle, body, l_hat, &options.policy);
                if let Some(t) = trial.filter(|t| t.inside) {
                    if best.as_ref().is_none_or(|b| t.result_volume > b.result_volume) {
                        best = Some(t);
                    }
                }
                records.push(rec);
            }
            Ok((records, best))
        })
        .collect();
    let mut records = Vec::with_capacity(options.trials);
    let mut best: Option<CenteredSimplexTrial> = None;
    for (r, b) in parts? {
        records.extend(r);
        if let Some(t) = b {
            // strict comparison keeps the earliest block on ties
            if best.as_ref().is_none_or(|cur| t.result_volume > cur.result_volume) {
                best = Some(t);
            }
        }
    }
    let summary = summarize(&records, l_hat, n);
    Ok(TrialRun { records, summary, best })
}
