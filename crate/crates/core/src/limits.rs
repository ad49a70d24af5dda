//! The three limit laws of the standardized statistic and the finite-sample
//! regime classification by `lambda_hat = n / sqrt(m)`.
//!
//! The Poisson-regime law is that of `(sqrt 2 / lambda) Z - lambda / sqrt 2`
//! with `Z ~ Pois(lambda^2 / 2)`: atoms at `x_k = (sqrt 2 / lambda) k - lambda / sqrt 2`,
//! mean 0 and variance 1 for every `lambda`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::special;

/// Relative slack used when mapping a real point to a Poisson atom index, so
/// that points computed on the lattice in floating point land on their atom.
const ATOM_SNAP: f64 = 1e-9;

/// Default regime cutoffs on `lambda_hat`.
pub const DEFAULT_LAMBDA_LO: f64 = 0.1;
pub const DEFAULT_LAMBDA_HI: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitLaw {
    /// Point mass at 0.
    DegenerateZero,
    /// Shifted and scaled `Pois(lambda^2 / 2)`.
    PoissonRegime { lambda: f64 },
    /// `N(0, 1)`.
    StdNormal,
}

impl LimitLaw {
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid_param(format!(
                "Poisson-regime lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(LimitLaw::PoissonRegime { lambda })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitLaw::DegenerateZero => "degenerate_zero",
            LimitLaw::PoissonRegime { .. } => "poisson_regime",
            LimitLaw::StdNormal => "std_normal",
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, LimitLaw::StdNormal)
    }

    /// Poisson mean `lambda^2 / 2` of the underlying count.
    fn poisson_mean(lambda: f64) -> f64 {
        0.5 * lambda * lambda
    }

    /// Position of `x` on the atom lattice, `lambda x / sqrt 2 + lambda^2 / 2`.
    fn lattice_index(lambda: f64, x: f64) -> f64 {
        lambda * x / SQRT_2 + Self::poisson_mean(lambda)
    }

    /// Value of atom `k` of the Poisson-regime law.
    pub fn atom(lambda: f64, k: u64) -> f64 {
        SQRT_2 / lambda * k as f64 - lambda / SQRT_2
    }

    /// `P(L <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::DegenerateZero => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::StdNormal => special::normal_cdf(x),
            LimitLaw::PoissonRegime { lambda } => {
                let t = Self::lattice_index(lambda, x);
                let t = (t + ATOM_SNAP * t.abs().max(1.0)).floor();
                if t < 0.0 {
                    0.0
                } else if t >= u64::MAX as f64 {
                    1.0
                } else {
                    special::poisson_cdf(t as u64, Self::poisson_mean(lambda))
                }
            }
        }
    }

    /// `P(L < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::DegenerateZero => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::StdNormal => special::normal_cdf(x),
            LimitLaw::PoissonRegime { lambda } => {
                // first atom index >= x, minus one
                let t = Self::lattice_index(lambda, x);
                let first = (t - ATOM_SNAP * t.abs().max(1.0)).ceil();
                if first <= 0.0 {
                    0.0
                } else if first >= u64::MAX as f64 {
                    1.0
                } else {
                    special::poisson_cdf(first as u64 - 1, Self::poisson_mean(lambda))
                }
            }
        }
    }

    /// Generalized inverse: smallest `x` with `cdf(x) >= q`, `0 < q < 1`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid_param(format!(
                "quantile level must lie in (0, 1), got {q}"
            )));
        }
        Ok(match *self {
            LimitLaw::DegenerateZero => 0.0,
            LimitLaw::StdNormal => special::normal_quantile(q),
            LimitLaw::PoissonRegime { lambda } => {
                let mean = Self::poisson_mean(lambda);
                // walk the pmf from the start of the effective support
                let mut k = 0u64;
                while special::poisson_cdf(k, mean) < q {
                    k += 1;
                }
                Self::atom(lambda, k)
            }
        })
    }

    /// `(E L, Var L)`.
    pub fn mean_var(&self) -> (f64, f64) {
        match self {
            LimitLaw::DegenerateZero => (0.0, 0.0),
            LimitLaw::PoissonRegime { .. } | LimitLaw::StdNormal => (0.0, 1.0),
        }
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LimitLaw::DegenerateZero => 0.0,
            LimitLaw::StdNormal => StandardNormal.sample(rng),
            LimitLaw::PoissonRegime { lambda } => {
                let z: f64 = Poisson::new(Self::poisson_mean(lambda))
                    .expect("lambda validated on construction")
                    .sample(rng);
                Self::atom(lambda, z as u64)
            }
        }
    }

    /// Upper tail `P(L >= t)`, including an atom located at `t`.
    pub fn p_value_upper(&self, t: f64) -> f64 {
        match *self {
            LimitLaw::DegenerateZero => {
                if t <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::StdNormal => special::normal_sf(t),
            LimitLaw::PoissonRegime { lambda } => {
                let idx = Self::lattice_index(lambda, t);
                let first = (idx - ATOM_SNAP * idx.abs().max(1.0)).ceil();
                if first <= 0.0 {
                    1.0
                } else if first >= u64::MAX as f64 {
                    0.0
                } else {
                    special::poisson_sf(first as u64, Self::poisson_mean(lambda))
                }
            }
        }
    }

    /// Atoms `(x, mass)` carrying at least `min_mass`, ascending in `x`.
    /// Empty for the normal law.
    pub fn atoms(&self, min_mass: f64) -> Vec<(f64, f64)> {
        match *self {
            LimitLaw::DegenerateZero => vec![(0.0, 1.0)],
            LimitLaw::StdNormal => Vec::new(),
            LimitLaw::PoissonRegime { lambda } => {
                let mean = Self::poisson_mean(lambda);
                let mode = mean.floor() as u64;
                let mut lo = mode;
                while lo > 0 && special::poisson_pmf(lo - 1, mean) >= min_mass {
                    lo -= 1;
                }
                let mut out = Vec::new();
                let mut k = lo;
                loop {
                    let p = special::poisson_pmf(k, mean);
                    if p < min_mass && k > mode {
                        break;
                    }
                    if p >= min_mass {
                        out.push((Self::atom(lambda, k), p));
                    }
                    k += 1;
                }
                out
            }
        }
    }

    /// Snaps `x` to an atom of a discrete law when it lies within rounding
    /// distance of one; otherwise returns `x` unchanged.
    pub fn snap_to_atom(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::DegenerateZero => {
                if x.abs() <= ATOM_SNAP {
                    0.0
                } else {
                    x
                }
            }
            LimitLaw::StdNormal => x,
            LimitLaw::PoissonRegime { lambda } => {
                let idx = Self::lattice_index(lambda, x);
                let k = idx.round();
                if k >= 0.0 && (idx - k).abs() <= ATOM_SNAP * idx.abs().max(1.0) {
                    Self::atom(lambda, k as u64)
                } else {
                    x
                }
            }
        }
    }
}

/// Regime cutoffs on `lambda_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            lambda_lo: DEFAULT_LAMBDA_LO,
            lambda_hi: DEFAULT_LAMBDA_HI,
        }
    }
}

impl Thresholds {
    pub fn new(lambda_lo: f64, lambda_hi: f64) -> Result<Self> {
        if !(lambda_lo > 0.0 && lambda_lo < lambda_hi && lambda_hi.is_finite()) {
            return Err(invalid_param(format!(
                "regime thresholds must satisfy 0 < lambda_lo < lambda_hi < inf, got ({lambda_lo}, {lambda_hi})"
            )));
        }
        Ok(Thresholds {
            lambda_lo,
            lambda_hi,
        })
    }
}

/// Regime recommendation for a finite `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub lambda_hat: f64,
    pub regime: LimitLaw,
    pub thresholds: Thresholds,
}

/// `lambda_hat = n / sqrt(m)`.
pub fn lambda_hat(n: u64, m: u64) -> f64 {
    n as f64 / (m as f64).sqrt()
}

/// Degenerate below `lambda_lo`, Poisson(`lambda_hat`) in between (inclusive),
/// normal above `lambda_hi`.
pub fn classify_regime(
    n: u64,
    m: u64,
    lambda_lo: f64,
    lambda_hi: f64,
) -> Result<RegimeClassification> {
    let thresholds = Thresholds::new(lambda_lo, lambda_hi)?;
    if n == 0 || m == 0 {
        return Err(invalid_param("n and m must both be at least 1"));
    }
    let lh = lambda_hat(n, m);
    let regime = if lh < lambda_lo {
        LimitLaw::DegenerateZero
    } else if lh <= lambda_hi {
        LimitLaw::PoissonRegime { lambda: lh }
    } else {
        LimitLaw::StdNormal
    };
    Ok(RegimeClassification {
        lambda_hat: lh,
        regime,
        thresholds,
    })
}

/// Upper-tail p-value of the chi-square law with `df` degrees of freedom.
pub fn classical_chi2_p_value(chi2: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(invalid_param("degrees of freedom must be at least 1"));
    }
    if !(chi2 >= 0.0 && chi2.is_finite()) {
        return Err(invalid_param(format!(
            "chi-square value must be finite and nonnegative, got {chi2}"
        )));
    }
    Ok(special::chi2_sf(chi2, df as f64))
}
