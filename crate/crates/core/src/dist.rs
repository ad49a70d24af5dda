//! Cell distributions `p(1..m)` and exact moments of the inverse cell
//! probability `1/p(X)`.
//!
//! Uniform and power-law families are analytic: cell probabilities are
//! computed on demand, so moments stream over the cells without an
//! `m`-length allocation. Custom distributions hold their probability vector.
//! All sums run over ascending cell index so results are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};

/// Largest number of cells accepted for a custom (non-analytic) distribution.
pub const CUSTOM_MAX_CELLS: u64 = 10_000_000;

/// Tolerance on `|sum p - 1|` under which custom input is renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// Family tag of a [`CellDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Uniform,
    PowerLaw { alpha: f64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Uniform,
    /// `p(i) = 1 / (norm * i^alpha)` with `norm = sum_i i^-alpha`.
    PowerLaw {
        alpha: f64,
        norm: f64,
    },
    Custom(Vec<f64>),
}

/// Distribution of a single draw over the cells `1..=m`.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDistribution {
    m: u64,
    shape: Shape,
}

impl CellDistribution {
    /// Equiprobable cells, `p(i) = 1/m`.
    pub fn uniform(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid_param("number of cells m must be at least 1"));
        }
        Ok(CellDistribution {
            m,
            shape: Shape::Uniform,
        })
    }

    /// Power-law cells `p(i) ∝ i^-alpha`, `0 <= alpha < 1`.
    ///
    /// The normalizing constant is summed exactly over all `m` cells.
    pub fn power_law(alpha: f64, m: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid_param(format!(
                "power-law exponent alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if m == 0 {
            return Err(invalid_param("number of cells m must be at least 1"));
        }
        let norm = if alpha == 0.0 {
            m as f64
        } else {
            (1..=m).map(|i| (i as f64).powf(-alpha)).sum()
        };
        Ok(CellDistribution {
            m,
            shape: Shape::PowerLaw { alpha, norm },
        })
    }

    /// Arbitrary positive cell probabilities.
    ///
    /// Input summing to within [`RENORMALIZE_TOLERANCE`] of one is rescaled;
    /// anything further off is rejected.
    pub fn custom(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("probability vector is empty".into()));
        }
        if probs.len() as u64 > CUSTOM_MAX_CELLS {
            return Err(Error::ResourceLimit(format!(
                "custom distributions are limited to {CUSTOM_MAX_CELLS} cells, got {}",
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "cell {} has probability {p}; every cell probability must be positive and finite",
                i + 1
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, which is not within {RENORMALIZE_TOLERANCE} of 1"
            )));
        }
        let probs = if total == 1.0 {
            probs
        } else {
            probs.into_iter().map(|p| p / total).collect()
        };
        Ok(CellDistribution {
            m: probs.len() as u64,
            shape: Shape::Custom(probs),
        })
    }

    /// Number of cells.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn family(&self) -> Family {
        match self.shape {
            Shape::Uniform => Family::Uniform,
            Shape::PowerLaw { alpha, .. } => Family::PowerLaw { alpha },
            Shape::Custom(_) => Family::Custom,
        }
    }

    /// True when every cell has probability `1/m` by construction
    /// (uniform family or power law with `alpha = 0`).
    pub fn is_uniform(&self) -> bool {
        match self.shape {
            Shape::Uniform => true,
            Shape::PowerLaw { alpha, .. } => alpha == 0.0,
            Shape::Custom(_) => false,
        }
    }

    /// Cell probabilities are computed from a formula rather than stored.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.shape, Shape::Custom(_))
    }

    /// Power-law normalizing constant `sum_i i^-alpha`, if applicable.
    pub fn power_law_norm(&self) -> Option<f64> {
        match self.shape {
            Shape::PowerLaw { norm, .. } => Some(norm),
            _ => None,
        }
    }

    /// Probability of cell `i` (1-based). Panics when `i` is out of range.
    #[inline]
    pub fn prob(&self, i: u64) -> f64 {
        assert!(
            i >= 1 && i <= self.m,
            "cell index {i} outside 1..={}",
            self.m
        );
        match &self.shape {
            Shape::Uniform => 1.0 / self.m as f64,
            Shape::PowerLaw { .. } => 1.0 / self.inv_prob(i),
            Shape::Custom(p) => p[(i - 1) as usize],
        }
    }

    /// `1 / p(i)`, computed without a reciprocal where the family allows it
    /// (exactly `m` for uniform cells).
    #[inline]
    pub fn inv_prob(&self, i: u64) -> f64 {
        assert!(
            i >= 1 && i <= self.m,
            "cell index {i} outside 1..={}",
            self.m
        );
        match &self.shape {
            Shape::Uniform => self.m as f64,
            Shape::PowerLaw { alpha, norm } => {
                if *alpha == 0.0 {
                    *norm
                } else {
                    norm * (i as f64).powf(*alpha)
                }
            }
            Shape::Custom(p) => 1.0 / p[(i - 1) as usize],
        }
    }

    /// Cell probabilities in ascending cell order.
    pub fn iter_probs(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.m).map(move |i| self.prob(i))
    }

    /// Dense probability vector. Allocates `m` doubles for analytic families.
    pub fn probs(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Custom(p) => p.clone(),
            _ => self.iter_probs().collect(),
        }
    }

    /// `E p^-r(X) = sum_i p(i)^(1-r)`.
    pub fn inv_prob_moment(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid_param(format!(
                "moment order r must be a finite nonnegative number, got {r}"
            )));
        }
        if r == 1.0 {
            return Ok(self.m as f64);
        }
        if self.is_uniform() {
            return Ok((self.m as f64).powf(r));
        }
        let e = r - 1.0;
        Ok((1..=self.m).map(|i| self.inv_prob(i).powf(e)).sum())
    }

    /// `Var p^-1(X) = E p^-2(X) - m^2`, evaluated as
    /// `sum_i p(i) (1/p(i) - m)^2` so it is never negative.
    pub fn inv_prob_variance(&self) -> f64 {
        if self.is_uniform() {
            return 0.0;
        }
        let m = self.m as f64;
        (1..=self.m)
            .map(|i| {
                let inv = self.inv_prob(i);
                let d = inv - m;
                d * d / inv
            })
            .sum()
    }

    /// `Var p^-1(X) / (m n)`; vanishing along a schedule is the condition
    /// under which `S_n` is negligible after standardization.
    pub fn condition_c_ratio(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid_param("sample size n must be at least 1"));
        }
        Ok(self.inv_prob_variance() / (self.m as f64 * n as f64))
    }

    /// `m^-(1+delta) E p^-(1+delta)(X)`; bounded along a schedule for the
    /// Gaussian regime.
    pub fn novnd_ratio(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid_param(format!(
                "delta must be positive and finite, got {delta}"
            )));
        }
        let r = 1.0 + delta;
        Ok(self.inv_prob_moment(r)? / (self.m as f64).powf(r))
    }
}
