//! Pearson chi-square goodness of fit when the number of cells grows with
//! the sample size.
//!
//! The statistic splits exactly as `chi2 = (U + S)/n - n`, where `U` counts
//! coincident pairs weighted by inverse cell probabilities and `S` sums the
//! inverse probabilities of the draws. With `lambda = n / sqrt(m)` the
//! standardized statistic `(chi2 - m)/sqrt(2m)` has three possible limits:
//! a point mass at zero (`lambda -> 0`), a shifted and scaled Poisson law
//! (`lambda` finite), and the standard normal (`lambda -> inf`).
//!
//! Modules:
//! - [`dist`]: cell distributions and inverse-probability moments.
//! - [`stat`]: sampling, the statistic, its decomposition and sequential terms.
//! - [`limits`]: the three reference laws and regime classification.
//! - [`asymptotics`]: exact finite-n moments and limit-theorem condition values.
//! - [`montecarlo`]: seeded, parallel, reproducible replication engine.
//! - [`io`]: CSV / text ingestion.

pub mod asymptotics;
pub mod dist;
mod error;
pub mod io;
pub mod limits;
pub mod montecarlo;
pub mod special;
pub mod stat;

pub use asymptotics::TheoryReport;
pub use dist::{CellDistribution, Family};
pub use error::{Error, Result};
pub use limits::{LimitLaw, RegimeClassification, Thresholds};
pub use montecarlo::{ExperimentConfig, ExperimentResult, Schedule};
pub use stat::{Chi2Breakdown, Convention, SampleCounts, SampleSequence};

/// Version string embedded in every serialized report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
