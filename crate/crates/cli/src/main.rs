use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use simplexkit::centered::CenterPolicy;
use simplexkit::enclosing::{enclose, EncloseOptions, CENTER_MAX_ITERS};
use simplexkit::harness::{
    construct, min_enclosing_triangle, reference_ball, reference_cube, sweep, CorpusBody, Polygon2D, SweepConfig,
};
use simplexkit::sampling::{sample_parallel, SamplerConfig, SamplerMethod};
use simplexkit::{BodySpec, ConvexBody};

/// Random centered simplices in convex bodies and small enclosing simplices
/// via polar duality.
#[derive(Parser)]
#[command(name = "simplexkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw uniform points from a body and write them as CSV.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampler: SamplerArgs,
        /// Body specification (JSON).
        #[arg(long)]
        body: PathBuf,
        /// Number of points.
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Run centered-simplex trials in the isotropic image of a body.
    Construct {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        trials: TrialArgs,
        /// Body specification (JSON).
        #[arg(long)]
        body: PathBuf,
    },
    /// Build an enclosing simplex through the polar body.
    Enclose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        trials: TrialArgs,
        /// Body specification (JSON).
        #[arg(long)]
        body: PathBuf,
        /// Iterations of the polar-barycenter centering.
        #[arg(long, default_value_t = CENTER_MAX_ITERS)]
        center_iters: usize,
    },
    /// Trials and enclosing ratios over a corpus of bodies and dimensions (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        trials: TrialArgs,
        /// Dimensions, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        /// Corpus bodies, comma separated. One of ball, cube, cross-polytope,
        /// random-vpolytope, random-hpolytope, centered-simplex; default all.
        #[arg(long, value_delimiter = ',')]
        bodies: Vec<String>,
        /// Also write the full sweep report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Closed-form ball and cube reference values for n = 1..=max-dim (CSV).
    Reference {
        #[command(flatten)]
        common: Common,
        /// Largest dimension.
        #[arg(long, default_value_t = 12)]
        max_dim: usize,
    },
    /// Minimal-area triangle around a convex polygon (JSON list of [x, y]).
    Triangle2d {
        #[command(flatten)]
        common: Common,
        /// Polygon vertices, counterclockwise, as JSON.
        #[arg(long)]
        polygon: PathBuf,
        /// Take the convex hull of the points instead of requiring a convex
        /// counterclockwise polygon.
        #[arg(long)]
        hull: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, env = "SIMPLEXKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timestamp recorded in report provenance. Omitted unless given.
    #[arg(long, env = "SOURCE_DATE_EPOCH")]
    timestamp: Option<String>,
}

#[derive(Args)]
struct SamplerArgs {
    /// exact or hnr (hit-and-run); default exact where available.
    #[arg(long)]
    sampler: Option<String>,
    /// Hit-and-run burn-in steps [default: 50·n²].
    #[arg(long)]
    burn_in: Option<usize>,
    /// Hit-and-run steps between emitted points [default: n²].
    #[arg(long)]
    thin: Option<usize>,
}

impl SamplerArgs {
    fn config(&self) -> Result<SamplerConfig> {
        let method = match &self.sampler {
            Some(s) => Some(s.parse::<SamplerMethod>()?),
            None => None,
        };
        Ok(SamplerConfig { method, burn_in: self.burn_in, thinning: self.thin })
    }
}

#[derive(Args)]
struct TrialArgs {
    /// Number of trials.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// adaptive or fixed:C1.
    #[arg(long, default_value = "adaptive")]
    policy: String,
    /// Inradius fraction for the adaptive policy.
    #[arg(long)]
    rho: Option<f64>,
}

impl TrialArgs {
    fn policy(&self) -> Result<CenterPolicy> {
        let mut policy: CenterPolicy = self.policy.parse()?;
        if let Some(r) = self.rho {
            match &mut policy {
                CenterPolicy::Adaptive { rho } => *rho = r,
                CenterPolicy::Fixed { .. } => bail!("--rho applies only to the adaptive policy"),
            }
        }
        policy.validate()?;
        Ok(policy)
    }
}

fn read_body(path: &Path) -> Result<ConvexBody> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BodySpec::from_json(&text)?.to_body()?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { common, sampler, body, count } => {
            let k = Arc::new(read_body(&body)?);
            let pts = sample_parallel(&k, &sampler.config()?, common.seed, 0, count)?;
            let n = k.dim();
            let mut out = (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",") + "\n";
            for p in &pts {
                let row: Vec<String> = p.iter().map(|&x| f(x)).collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
            emit(&common.out, &out)
        }
        Command::Construct { common, sampler, trials, body } => {
            let k = read_body(&body)?;
            let report =
                construct(&k, trials.trials, trials.policy()?, sampler.config()?, common.seed, common.timestamp)?;
            emit(&common.out, &(report.to_json() + "\n"))
        }
        Command::Enclose { common, sampler, trials, body, center_iters } => {
            let k = read_body(&body)?;
            let opts = EncloseOptions {
                trials: trials.trials,
                policy: trials.policy()?,
                sampler: sampler.config()?,
                seed: common.seed,
                center_iters,
            };
            let r = enclose(&k, &opts)?;
            let doc = json!({
                "vertices": r.enclosing,
                "contains": r.contains,
                "ratio": r.ratio,
                "normalized": r.normalized,
                "translation": r.translation.as_slice(),
                "eqb_residual": r.audit.residual,
                "simplex_volume": r.simplex_volume,
                "body_volume": r.body_volume,
                "body_volume_exact": r.body_volume_exact,
                "l_hat": r.l_hat,
                "audit": r.audit,
                "centering": {
                    "residual": r.centering.residual,
                    "polar_barycenter_norm": r.centering.polar_barycenter_norm,
                    "iterations": r.centering.iterations,
                    "converged": r.centering.converged,
                },
                "trials": r.trials,
                "config": {
                    "seed": common.seed,
                    "trials": opts.trials,
                    "policy": opts.policy,
                    "sampler": opts.sampler,
                    "body": BodySpec::from_body(&k),
                },
                "provenance": { "version": env!("CARGO_PKG_VERSION"), "timestamp": common.timestamp },
            });
            emit(&common.out, &pretty(&doc)?)
        }
        Command::Sweep { common, sampler, trials, dims, bodies, json } => {
            let corpus = if bodies.is_empty() {
                CorpusBody::ALL.to_vec()
            } else {
                bodies.iter().map(|b| b.parse()).collect::<Result<Vec<CorpusBody>, _>>()?
            };
            let config = SweepConfig {
                dims,
                corpus,
                trials: trials.trials,
                seed: common.seed,
                policy: trials.policy()?,
                sampler: sampler.config()?,
            };
            let report = sweep(&config, common.timestamp)?;
            for row in &report.rows {
                if let Some(e) = &row.error {
                    eprintln!("warning: {} n={}: {e}", row.body.name(), row.n);
                }
            }
            if let Some(p) = &json {
                emit(&Some(p.clone()), &pretty(&serde_json::to_value(&report)?)?)?;
            }
            emit(&common.out, &report.to_csv())
        }
        Command::Reference { common, max_dim } => {
            if max_dim == 0 {
                bail!("--max-dim must be at least 1");
            }
            let mut out = String::from("n,ball_vol_simplex,ball_vol_body,ball_normalized,cube_bound,cube_certified\n");
            for n in 1..=max_dim {
                let b = reference_ball(n)?;
                let c = reference_cube(n)?;
                let _ = writeln!(
                    out,
                    "{n},{},{},{},{},{}",
                    f(b.vol_simplex),
                    f(b.vol_ball),
                    f(b.normalized_ratio),
                    f(c.normalized_ratio_bound),
                    c.certified
                );
            }
            emit(&common.out, &out)
        }
        Command::Triangle2d { common, polygon, hull } => {
            let text = fs::read_to_string(&polygon).with_context(|| format!("reading {}", polygon.display()))?;
            let pts: Vec<[f64; 2]> = serde_json::from_str(&text).context("polygon must be a list of [x, y]")?;
            let p = if hull { Polygon2D::hull_of(&pts)? } else { Polygon2D::new(pts)? };
            let t = min_enclosing_triangle(&p)?;
            let doc = json!({
                "triangle": t,
                "triangle_area": t.volume(),
                "polygon_area": p.area(),
                "ratio": t.volume() / p.area(),
            });
            emit(&common.out, &pretty(&doc)?)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
