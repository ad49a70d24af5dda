//! One-pass moment accumulators and the exact-moment z-score check.

use serde::{Deserialize, Serialize};

use crate::asymptotics::TheoryReport;
use crate::error::{Error, Result};

/// Running central moments up to order four (Welford / Pébay updates).
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 below two observations.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn mean_se(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance,
    /// `sqrt((mu4 - sigma^4) / R)`.
    pub fn variance_se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let r = self.n as f64;
        let s2 = self.m2 / r;
        ((self.m4 / r - s2 * s2).max(0.0) / r).sqrt()
    }
}

/// Running co-moment of a pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningCovariance {
    n: u64,
    mean_x: f64,
    mean_y: f64,
    c: f64,
}

impl RunningCovariance {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        self.mean_y += (y - self.mean_y) / n;
        self.c += dx * (y - self.mean_y);
    }

    pub fn covariance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.c / (self.n - 1) as f64
        }
    }
}

/// Replicate aggregates needed to compare against exact moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub replicates: u64,
    pub chi2_mean: f64,
    pub chi2_mean_se: f64,
    pub chi2_var: f64,
    pub chi2_var_se: f64,
    pub u_mean: f64,
    pub u_mean_se: f64,
    pub u_var: f64,
    pub u_var_se: f64,
    pub s_mean: f64,
    pub s_mean_se: f64,
    pub s_var: f64,
    pub cov_us: f64,
    /// From the spread of `(U - EU)(S - ES)` across replicates.
    pub cov_us_se: f64,
}

/// Accumulates the statistics behind a [`MomentSummary`].
#[derive(Debug, Clone, Copy)]
pub struct MomentAccumulator {
    chi2: RunningMoments,
    u: RunningMoments,
    s: RunningMoments,
    us: RunningCovariance,
    cross: RunningMoments,
    exact_u: f64,
    exact_s: f64,
}

impl MomentAccumulator {
    pub fn new(exact_u: f64, exact_s: f64) -> Self {
        MomentAccumulator {
            chi2: RunningMoments::default(),
            u: RunningMoments::default(),
            s: RunningMoments::default(),
            us: RunningCovariance::default(),
            cross: RunningMoments::default(),
            exact_u,
            exact_s,
        }
    }

    pub fn push(&mut self, chi2: f64, u: f64, s: f64) {
        self.chi2.push(chi2);
        self.u.push(u);
        self.s.push(s);
        self.us.push(u, s);
        self.cross.push((u - self.exact_u) * (s - self.exact_s));
    }

    pub fn summary(&self) -> MomentSummary {
        MomentSummary {
            replicates: self.chi2.count(),
            chi2_mean: self.chi2.mean(),
            chi2_mean_se: self.chi2.mean_se(),
            chi2_var: self.chi2.variance(),
            chi2_var_se: self.chi2.variance_se(),
            u_mean: self.u.mean(),
            u_mean_se: self.u.mean_se(),
            u_var: self.u.variance(),
            u_var_se: self.u.variance_se(),
            s_mean: self.s.mean(),
            s_mean_se: self.s.mean_se(),
            s_var: self.s.variance(),
            cov_us: self.us.covariance(),
            cov_us_se: self.cross.mean_se(),
        }
    }
}

/// One estimate compared with its exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentZ {
    pub name: String,
    pub estimate: f64,
    pub exact: f64,
    pub se: f64,
    /// `(estimate - exact) / se`; 0 when the two agree exactly.
    pub z: f64,
}

fn z_score(name: &str, estimate: f64, exact: f64, se: f64) -> MomentZ {
    let diff = estimate - exact;
    let z = if diff == 0.0 { 0.0 } else { diff / se };
    MomentZ {
        name: name.to_string(),
        estimate,
        exact,
        se,
        z,
    }
}

/// z-scores for `E chi2`, `Var chi2`, `E U`, `E S` and `Cov(U, S)`.
pub fn moment_check(summary: &MomentSummary, theory: &TheoryReport) -> Result<Vec<MomentZ>> {
    if summary.replicates < 2 {
        return Err(Error::InvalidInput(format!(
            "moment check needs at least 2 replicates, have {}",
            summary.replicates
        )));
    }
    Ok(vec![
        z_score(
            "chi2_mean",
            summary.chi2_mean,
            theory.chi2_mean,
            summary.chi2_mean_se,
        ),
        z_score(
            "chi2_var",
            summary.chi2_var,
            theory.chi2_var,
            summary.chi2_var_se,
        ),
        z_score("u_mean", summary.u_mean, theory.mean_u, summary.u_mean_se),
        z_score("s_mean", summary.s_mean, theory.mean_s, summary.s_mean_se),
        z_score("cov_us", summary.cov_us, 0.0, summary.cov_us_se),
    ])
}
