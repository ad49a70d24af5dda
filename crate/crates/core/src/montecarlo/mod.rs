//! Seeded, parallel replication of the statistic and its distances to the
//! candidate limit laws.
//!
//! Replicate `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so
//! each replicate is a pure function of `(config, i)`. Replicates run on a
//! rayon pool, are collected in index order and folded sequentially; output
//! is therefore identical for any number of workers.

mod distance;
mod moments;
mod report;
mod schedule;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, TheoryReport};
use crate::dist::CellDistribution;
use crate::error::{invalid_param, Error, Result};
use crate::io;
use crate::limits::{self, LimitLaw, Thresholds, DEFAULT_LAMBDA_HI, DEFAULT_LAMBDA_LO};
use crate::stat::{self, Convention, Sampler};

pub use distance::{
    ks_distance, tv_distance_poisson, tv_from_histogram, GridCdf, ATOM_MIN_MASS, GRID_HALF_WIDTH,
    GRID_POINTS, TV_TAIL,
};
pub use moments::{
    moment_check, MomentAccumulator, MomentSummary, MomentZ, RunningCovariance, RunningMoments,
};
pub use report::{
    replicates_csv, sweep_csv, write_replicates_csv, write_sweep_csv, REPLICATES_CSV_HEADER,
    SWEEP_CSV_HEADER,
};
pub use schedule::{Schedule, ScheduleRule};

/// Raw replicate values are kept up to this many replicates (or on request).
pub const RAW_RETAIN_MAX: u64 = 100_000;

/// Replicates simulated per parallel batch when streaming.
const BATCH: usize = 1 << 16;

/// `delta` and `epsilon` used for the theory values attached to a result.
pub const TARGET_DELTA: f64 = 1.0;
pub const TARGET_EPSILON: f64 = 0.5;

/// Default replicate counts by regime.
pub const DEFAULT_REPLICATES_NORMAL: u64 = 2000;
pub const DEFAULT_REPLICATES_SMALL: u64 = 20_000;

/// Cell distribution named in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistSpecRepr")]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistSpec {
    Uniform,
    PowerLaw {
        alpha: f64,
    },
    /// Probabilities read from a file with one value per line.
    Custom {
        probs_file: PathBuf,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DistSpecRepr {
    Name(String),
    Tagged(TaggedDistSpec),
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum TaggedDistSpec {
    Uniform,
    PowerLaw { alpha: f64 },
    Custom { probs_file: PathBuf },
}

impl TryFrom<DistSpecRepr> for DistSpec {
    type Error = String;

    fn try_from(r: DistSpecRepr) -> std::result::Result<Self, String> {
        match r {
            DistSpecRepr::Name(s) if s == "uniform" => Ok(DistSpec::Uniform),
            DistSpecRepr::Name(s) => Err(format!(
                "distribution '{s}' needs parameters; use an object such as {{\"family\": \"power_law\", \"alpha\": 0.5}}"
            )),
            DistSpecRepr::Tagged(TaggedDistSpec::Uniform) => Ok(DistSpec::Uniform),
            DistSpecRepr::Tagged(TaggedDistSpec::PowerLaw { alpha }) => {
                Ok(DistSpec::PowerLaw { alpha })
            }
            DistSpecRepr::Tagged(TaggedDistSpec::Custom { probs_file }) => {
                Ok(DistSpec::Custom { probs_file })
            }
        }
    }
}

impl DistSpec {
    /// Builds the distribution on `m` cells. Custom files must list exactly
    /// `m` probabilities.
    pub fn resolve(&self, m: u64) -> Result<CellDistribution> {
        match self {
            DistSpec::Uniform => CellDistribution::uniform(m),
            DistSpec::PowerLaw { alpha } => CellDistribution::power_law(*alpha, m),
            DistSpec::Custom { probs_file } => {
                let probs = io::read_probs(probs_file)?;
                if probs.len() as u64 != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: probs.len() as u64,
                    });
                }
                CellDistribution::custom(probs)
            }
        }
    }
}

fn default_lambda_lo() -> f64 {
    DEFAULT_LAMBDA_LO
}

fn default_lambda_hi() -> f64 {
    DEFAULT_LAMBDA_HI
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DistSpec,
    pub n: u64,
    pub m: u64,
    pub replicates: u64,
    pub seed: u64,
    #[serde(default)]
    pub convention: Convention,
    /// Reference law for `ks_reference` instead of the classified regime.
    #[serde(default)]
    pub law_override: Option<LimitLaw>,
    #[serde(default = "default_lambda_lo")]
    pub lambda_lo: f64,
    #[serde(default = "default_lambda_hi")]
    pub lambda_hi: f64,
    /// Keep per-replicate values even above [`RAW_RETAIN_MAX`] replicates.
    #[serde(default)]
    pub retain_raw: bool,
    /// Worker threads; `None` or `Some(0)` means one per core. Never affects
    /// the numbers, so it is not echoed in results.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Uniform-cell config with default convention and thresholds.
    pub fn uniform(n: u64, m: u64, replicates: u64, seed: u64) -> Self {
        ExperimentConfig {
            distribution: DistSpec::Uniform,
            n,
            m,
            replicates,
            seed,
            convention: Convention::Theorem,
            law_override: None,
            lambda_lo: DEFAULT_LAMBDA_LO,
            lambda_hi: DEFAULT_LAMBDA_HI,
            retain_raw: false,
            workers: None,
        }
    }

    pub fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::new(self.lambda_lo, self.lambda_hi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid_param("replicates must be at least 1"));
        }
        if self.n == 0 || self.m == 0 {
            return Err(invalid_param("n and m must both be at least 1"));
        }
        self.thresholds()?;
        if self.convention == Convention::Classical && self.m < 2 {
            return Err(invalid_param(
                "classical standardization needs at least 2 cells",
            ));
        }
        Ok(())
    }
}

/// Values recorded for one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub chi2: f64,
    pub u: f64,
    pub s: f64,
    pub standardized: f64,
    pub collisions: u64,
}

/// How the KS distances were evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsMethod {
    /// Over all sample points and law atoms.
    Exact,
    /// On the fixed streaming grid.
    Grid,
}

/// Summary of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub convention: Convention,
    pub thresholds: Thresholds,
    pub lambda_hat: f64,
    /// Limit law recommended by the regime classification.
    pub regime: LimitLaw,
    /// Law used for `ks_reference`.
    pub reference_law: LimitLaw,
    pub empirical_mean: f64,
    pub empirical_var: f64,
    pub ks_normal: f64,
    /// Against the shifted-scaled Poisson law with `lambda = lambda_hat`.
    pub ks_poisson: f64,
    pub ks_reference: f64,
    pub ks_method: KsMethod,
    /// Mean `n(n-1)/(2m)` of the collision count under uniform cells.
    pub collision_mean: f64,
    /// TV distance of collision counts to `Pois(collision_mean)`; uniform
    /// cells only.
    pub tv_poisson: Option<f64>,
    /// Fraction of replicates without any collision.
    pub prob_at_zero: f64,
    pub moments: MomentSummary,
    pub exact_targets: TheoryReport,
    #[serde(skip)]
    pub raw: Option<Vec<ReplicateRecord>>,
}

/// Independent generator for replicate `index`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Context<'a> {
    dist: &'a CellDistribution,
    sampler: Sampler,
    n: u64,
    seed: u64,
    convention: Convention,
}

impl Context<'_> {
    fn replicate(&self, index: u64) -> Result<ReplicateRecord> {
        let mut rng = replicate_rng(self.seed, index);
        let counts = self.sampler.draw_counts(self.n, &mut rng)?;
        let b = stat::decompose(self.dist, &counts)?;
        let collisions = stat::collision_pairs(&counts);
        if self.dist.is_uniform() {
            let m = self.dist.m() as f64;
            let n = self.n as f64;
            let via_pairs = 2.0 * m * collisions as f64 / n + m - n;
            assert!(
                (b.chi2 - via_pairs).abs() <= 1e-9 * (1.0 + b.chi2.abs()),
                "uniform replicate {index}: chi2 {} disagrees with collision form {via_pairs}",
                b.chi2
            );
        }
        Ok(ReplicateRecord {
            replicate: index,
            chi2: b.chi2,
            u: b.u_stat,
            s: b.s_stat,
            standardized: stat::standardize_value(b.chi2, self.dist.m(), self.convention)?,
            collisions,
        })
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::ResourceLimit(format!("cannot start worker pool: {e}")))
}

/// Runs the experiment described by `cfg`, reading custom probabilities from
/// disk if needed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let d = cfg.distribution.resolve(cfg.m)?;
    run_with_distribution(cfg, &d)
}

/// As [`run_experiment`], with the distribution already built. `cfg.m` must
/// match `d`.
pub fn run_with_distribution(
    cfg: &ExperimentConfig,
    d: &CellDistribution,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if d.m() != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: cfg.m,
            found: d.m(),
        });
    }
    let thresholds = cfg.thresholds()?;
    let class = limits::classify_regime(cfg.n, cfg.m, cfg.lambda_lo, cfg.lambda_hi)?;
    let reference_law = cfg.law_override.unwrap_or(class.regime);
    let poisson_law = LimitLaw::poisson(class.lambda_hat)?;
    let exact_targets = TheoryReport::compute(d, cfg.n, TARGET_DELTA, TARGET_EPSILON)?;

    let ctx = Context {
        dist: d,
        sampler: Sampler::new(d)?,
        n: cfg.n,
        seed: cfg.seed,
        convention: cfg.convention,
    };
    let pool = build_pool(cfg.workers)?;
    let retain = cfg.retain_raw || cfg.replicates <= RAW_RETAIN_MAX;

    let mut std_moments = RunningMoments::default();
    let mut acc = MomentAccumulator::new(asymptotics::mean_u(cfg.n), asymptotics::mean_s(d, cfg.n));
    let mut collisions: BTreeMap<u64, u64> = BTreeMap::new();
    let mut grid = GridCdf::default();
    let mut raw: Vec<ReplicateRecord> = Vec::new();

    let total = cfg.replicates;
    let mut start = 0u64;
    while start < total {
        let end = total.min(start + BATCH as u64);
        let batch: Vec<ReplicateRecord> = pool.install(|| {
            (start as usize..end as usize)
                .into_par_iter()
                .map(|i| ctx.replicate(i as u64))
                .collect::<Result<Vec<_>>>()
        })?;
        for r in &batch {
            std_moments.push(r.standardized);
            acc.push(r.chi2, r.u, r.s);
            *collisions.entry(r.collisions).or_insert(0) += 1;
            if !retain {
                grid.push(r.standardized);
            }
        }
        if retain {
            raw.extend(batch);
        }
        start = end;
    }

    let (ks_normal, ks_poisson, ks_reference, ks_method) = if retain {
        let xs: Vec<f64> = raw.iter().map(|r| r.standardized).collect();
        (
            ks_distance(&xs, &LimitLaw::StdNormal)?,
            ks_distance(&xs, &poisson_law)?,
            ks_distance(&xs, &reference_law)?,
            KsMethod::Exact,
        )
    } else {
        (
            grid.ks(&LimitLaw::StdNormal),
            grid.ks(&poisson_law),
            grid.ks(&reference_law),
            KsMethod::Grid,
        )
    };

    let collision_mean = cfg.n as f64 * (cfg.n as f64 - 1.0) / (2.0 * cfg.m as f64);
    let tv_poisson = if d.is_uniform() && collision_mean > 0.0 {
        Some(tv_from_histogram(&collisions, total, collision_mean)?)
    } else {
        None
    };
    let zero = collisions.get(&0).copied().unwrap_or(0);

    Ok(ExperimentResult {
        tool_version: crate::VERSION.to_string(),
        config: cfg.clone(),
        convention: cfg.convention,
        thresholds,
        lambda_hat: class.lambda_hat,
        regime: class.regime,
        reference_law,
        empirical_mean: std_moments.mean(),
        empirical_var: std_moments.variance(),
        ks_normal,
        ks_poisson,
        ks_reference,
        ks_method,
        collision_mean,
        tv_poisson,
        prob_at_zero: zero as f64 / total as f64,
        moments: acc.summary(),
        exact_targets,
        raw: retain.then_some(raw),
    })
}

/// Runs `base` at every schedule point; point `i` uses seed `base.seed ^ i`.
/// `base.n` and `base.m` are ignored.
pub fn convergence_sweep(
    sched: &Schedule,
    base: &ExperimentConfig,
) -> Result<Vec<ExperimentResult>> {
    sched
        .points()
        .iter()
        .enumerate()
        .map(|(i, &(n, m))| {
            let cfg = point_config(base, i, n, m);
            run_experiment(&cfg)
        })
        .collect()
}

/// Configuration used for schedule point `index`.
pub fn point_config(base: &ExperimentConfig, index: usize, n: u64, m: u64) -> ExperimentConfig {
    ExperimentConfig {
        n,
        m,
        seed: base.seed ^ index as u64,
        ..base.clone()
    }
}

/// Sweep description: a schedule plus every experiment setting except `n`
/// and `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub distribution: DistSpec,
    pub schedule: Schedule,
    pub replicates: u64,
    pub seed: u64,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub law_override: Option<LimitLaw>,
    #[serde(default = "default_lambda_lo")]
    pub lambda_lo: f64,
    #[serde(default = "default_lambda_hi")]
    pub lambda_hi: f64,
    #[serde(default)]
    pub retain_raw: bool,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl SweepConfig {
    /// Experiment settings shared by all points, at the first point.
    pub fn base(&self) -> ExperimentConfig {
        let (n, m) = self.schedule.points()[0];
        ExperimentConfig {
            distribution: self.distribution.clone(),
            n,
            m,
            replicates: self.replicates,
            seed: self.seed,
            convention: self.convention,
            law_override: self.law_override,
            lambda_lo: self.lambda_lo,
            lambda_hi: self.lambda_hi,
            retain_raw: self.retain_raw,
            workers: self.workers,
        }
    }

    pub fn run(&self) -> Result<Vec<ExperimentResult>> {
        convergence_sweep(&self.schedule, &self.base())
    }
}
