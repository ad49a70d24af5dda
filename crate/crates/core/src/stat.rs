//! Sampling of one row of the array and exact evaluation of the Pearson
//! statistic together with its `U_n` / `S_n` split.
//!
//! Counts are the canonical representation: a sorted sparse list of occupied
//! cells, so memory is `O(min(n, m))` and `m` can be very large for analytic
//! families. Ordered sequences are only needed for the sequential terms
//! `A_{n,k}`.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::dist::CellDistribution;
use crate::error::{invalid_param, Error, Result};

/// Occupancy counts `N_i` of a sample of size `n` over `m` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    n: u64,
    m: u64,
    /// `(cell, count)` with `count > 0`, ascending by cell.
    cells: Vec<(u64, u64)>,
}

impl SampleCounts {
    /// Builds counts from `(cell, count)` pairs in any order. Zero counts are
    /// dropped; repeated cells are rejected.
    pub fn new(m: u64, pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        if m == 0 {
            return Err(invalid_param("number of cells m must be at least 1"));
        }
        let mut cells: Vec<(u64, u64)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        cells.sort_unstable_by_key(|&(i, _)| i);
        for w in cells.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("cell {} listed twice", w[0].0)));
            }
        }
        if let Some(&(i, _)) = cells.iter().find(|&&(i, _)| i == 0 || i > m) {
            return Err(Error::InvalidInput(format!(
                "cell index {i} outside 1..={m}"
            )));
        }
        let n = cells
            .iter()
            .try_fold(0u64, |acc, &(_, c)| acc.checked_add(c))
            .ok_or_else(|| Error::InvalidInput("total count overflows".into()))?;
        if n == 0 {
            return Err(Error::InvalidInput(
                "sample is empty (all counts zero)".into(),
            ));
        }
        Ok(SampleCounts { n, m, cells })
    }

    /// Counts from a dense vector `counts[i-1] = N_i`.
    pub fn from_dense(counts: &[u64]) -> Result<Self> {
        Self::new(
            counts.len() as u64,
            counts.iter().enumerate().map(|(i, &c)| (i as u64 + 1, c)),
        )
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Occupied cells as `(cell, count)`, ascending.
    pub fn occupied(&self) -> &[(u64, u64)] {
        &self.cells
    }

    pub fn count(&self, cell: u64) -> u64 {
        self.cells
            .binary_search_by_key(&cell, |&(i, _)| i)
            .map(|k| self.cells[k].1)
            .unwrap_or(0)
    }

    /// Dense vector of all `m` counts.
    pub fn to_dense(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.m as usize];
        for &(i, c) in &self.cells {
            v[(i - 1) as usize] = c;
        }
        v
    }
}

/// Ordered draws `X_1..X_n` over `m` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSequence {
    m: u64,
    values: Vec<u64>,
}

impl SampleSequence {
    pub fn new(m: u64, values: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(invalid_param("number of cells m must be at least 1"));
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("sequence is empty".into()));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, &v)| v == 0 || v > m) {
            return Err(Error::InvalidInput(format!(
                "draw {} has cell index {v} outside 1..={m}",
                k + 1
            )));
        }
        Ok(SampleSequence { m, values })
    }

    pub fn n(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn to_counts(&self) -> SampleCounts {
        SampleCounts {
            n: self.n(),
            m: self.m,
            cells: tally(self.values.clone(), self.m),
        }
    }
}

/// Statistic together with its two components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Breakdown {
    pub chi2: f64,
    /// `U_n = sum_i N_i (N_i - 1) / p_i`
    pub u_stat: f64,
    /// `S_n = sum_i N_i / p_i`
    pub s_stat: f64,
    pub n: u64,
    pub m: u64,
}

impl Chi2Breakdown {
    /// `chi2 - ((U + S)/n - n)`; zero up to rounding.
    pub fn identity_residual(&self) -> f64 {
        self.chi2 - ((self.u_stat + self.s_stat) / self.n as f64 - self.n as f64)
    }
}

/// Centering and scaling of the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `(chi2 - m) / sqrt(2m)`, as in the limit theorems.
    #[default]
    Theorem,
    /// `(chi2 - (m-1)) / sqrt(2(m-1))`, the fixed-`m` chi-square moments.
    Classical,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Theorem => "theorem",
            Convention::Classical => "classical",
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(Convention::Theorem),
            "classical" => Ok(Convention::Classical),
            other => Err(invalid_param(format!(
                "unknown convention '{other}' (expected theorem or classical)"
            ))),
        }
    }
}

/// Draws cell indices from a fixed distribution.
///
/// Uniform cells use a direct integer draw, power laws a rejection-inversion
/// Zipf sampler (no per-cell table), custom cells an alias table.
#[derive(Debug, Clone)]
pub struct Sampler {
    m: u64,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Uniform,
    Zipf(Zipf<f64>),
    Alias(WeightedAliasIndex<f64>),
}

impl Sampler {
    pub fn new(d: &CellDistribution) -> Result<Self> {
        let kind = if d.is_uniform() {
            SamplerKind::Uniform
        } else {
            match d.family() {
                crate::Family::PowerLaw { alpha } => SamplerKind::Zipf(
                    Zipf::new(d.m() as f64, alpha).map_err(|e| invalid_param(e.to_string()))?,
                ),
                _ => SamplerKind::Alias(
                    WeightedAliasIndex::new(d.probs())
                        .map_err(|e| Error::InvalidInput(e.to_string()))?,
                ),
            }
        };
        Ok(Sampler { m: d.m(), kind })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// One cell index in `1..=m`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.kind {
            SamplerKind::Uniform => rng.random_range(1..=self.m),
            SamplerKind::Zipf(z) => (z.sample(rng) as u64).clamp(1, self.m),
            SamplerKind::Alias(a) => a.sample(rng) as u64 + 1,
        }
    }

    pub fn draw_sequence<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<SampleSequence> {
        if n == 0 {
            return Err(invalid_param("sample size n must be at least 1"));
        }
        let values = (0..n).map(|_| self.sample(rng)).collect();
        Ok(SampleSequence { m: self.m, values })
    }

    pub fn draw_counts<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<SampleCounts> {
        if n == 0 {
            return Err(invalid_param("sample size n must be at least 1"));
        }
        let draws: Vec<u64> = (0..n).map(|_| self.sample(rng)).collect();
        Ok(SampleCounts {
            n,
            m: self.m,
            cells: tally(draws, self.m),
        })
    }
}

/// Cells up to this size are tallied in a dense scratch vector when that is
/// not larger than the sample itself.
const DENSE_TALLY_MAX: u64 = 1 << 22;

fn tally(mut draws: Vec<u64>, m: u64) -> Vec<(u64, u64)> {
    if m <= DENSE_TALLY_MAX && m <= draws.len() as u64 {
        let mut dense = vec![0u64; m as usize];
        for &x in &draws {
            dense[(x - 1) as usize] += 1;
        }
        return dense
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (i as u64 + 1, c))
            .collect();
    }
    draws.sort_unstable();
    let mut cells: Vec<(u64, u64)> = Vec::new();
    for x in draws {
        match cells.last_mut() {
            Some((i, c)) if *i == x => *c += 1,
            _ => cells.push((x, 1)),
        }
    }
    cells
}

/// `n` iid draws from `d`, tallied into counts.
pub fn draw_counts<R: Rng + ?Sized>(
    d: &CellDistribution,
    n: u64,
    rng: &mut R,
) -> Result<SampleCounts> {
    Sampler::new(d)?.draw_counts(n, rng)
}

/// `n` iid ordered draws from `d`.
pub fn draw_sequence<R: Rng + ?Sized>(
    d: &CellDistribution,
    n: u64,
    rng: &mut R,
) -> Result<SampleSequence> {
    Sampler::new(d)?.draw_sequence(n, rng)
}

fn check_dims(d: &CellDistribution, m: u64) -> Result<()> {
    if d.m() != m {
        return Err(Error::DimensionMismatch {
            expected: d.m(),
            found: m,
        });
    }
    Ok(())
}

/// Pearson statistic `n sum_i (N_i/n - p_i)^2 / p_i`.
///
/// Occupied cells are visited sparsely. Empty cells contribute `n p_i`
/// each; for analytic families their total is `n (1 - sum_occupied p_i)`,
/// for custom distributions a dense pass over all cells is made.
pub fn chi_square(d: &CellDistribution, c: &SampleCounts) -> Result<f64> {
    check_dims(d, c.m)?;
    let n = c.n as f64;
    if !d.is_analytic() {
        return Ok(dense_pass(d, c));
    }
    if d.is_uniform() {
        let m = d.m() as f64;
        let expected = n / m;
        let occupied: f64 = c
            .cells
            .iter()
            .map(|&(_, k)| {
                let r = k as f64 - expected;
                r * r / expected
            })
            .sum();
        let empty = (d.m() - c.cells.len() as u64) as f64;
        return Ok(occupied + n * empty / m);
    }
    let mut occupied = 0.0;
    let mut mass = 0.0;
    for &(i, k) in &c.cells {
        let p = d.prob(i);
        let e = n * p;
        let r = k as f64 - e;
        occupied += r * r / e;
        mass += p;
    }
    Ok(occupied + n * (1.0 - mass))
}

fn dense_pass(d: &CellDistribution, c: &SampleCounts) -> f64 {
    let n = c.n as f64;
    let mut occ = c.cells.iter().peekable();
    let mut total = 0.0;
    for (idx, p) in d.iter_probs().enumerate() {
        let i = idx as u64 + 1;
        let k = match occ.peek() {
            Some(&&(j, k)) if j == i => {
                occ.next();
                k as f64
            }
            _ => 0.0,
        };
        let e = n * p;
        let r = k - e;
        total += r * r / e;
    }
    total
}

/// Literal dense evaluation `n sum_i (phat_i - p_i)^2 / p_i` over all cells.
///
/// Reference path for cross-checking [`chi_square`]; allocates nothing but
/// visits every cell.
pub fn chi_square_dense(d: &CellDistribution, c: &SampleCounts) -> Result<f64> {
    check_dims(d, c.m)?;
    if d.m() > crate::dist::CUSTOM_MAX_CELLS {
        return Err(Error::ResourceLimit(format!(
            "dense evaluation is limited to {} cells",
            crate::dist::CUSTOM_MAX_CELLS
        )));
    }
    let n = c.n as f64;
    let dense = c.to_dense();
    Ok(n * d
        .iter_probs()
        .zip(dense)
        .map(|(p, k)| {
            let r = k as f64 / n - p;
            r * r / p
        })
        .sum::<f64>())
}

/// `U_n = sum_i N_i (N_i - 1) / p_i`, the pairwise coincidence sum grouped by
/// cell.
pub fn u_statistic(d: &CellDistribution, c: &SampleCounts) -> Result<f64> {
    check_dims(d, c.m)?;
    Ok(c.cells
        .iter()
        .filter(|&&(_, k)| k > 1)
        .map(|&(i, k)| (k * (k - 1)) as f64 * d.inv_prob(i))
        .fold(0.0, |acc, x| acc + x))
}

/// `S_n = sum_i N_i / p_i`; exactly `n m` for uniform cells.
pub fn s_statistic(d: &CellDistribution, c: &SampleCounts) -> Result<f64> {
    check_dims(d, c.m)?;
    if d.is_uniform() {
        return Ok(c.n as f64 * d.m() as f64);
    }
    Ok(c.cells.iter().map(|&(i, k)| k as f64 * d.inv_prob(i)).sum())
}

/// All three quantities at once.
pub fn decompose(d: &CellDistribution, c: &SampleCounts) -> Result<Chi2Breakdown> {
    Ok(Chi2Breakdown {
        chi2: chi_square(d, c)?,
        u_stat: u_statistic(d, c)?,
        s_stat: s_statistic(d, c)?,
        n: c.n,
        m: c.m,
    })
}

/// Centered and scaled statistic under the given convention.
pub fn standardize(b: &Chi2Breakdown, convention: Convention) -> Result<f64> {
    standardize_value(b.chi2, b.m, convention)
}

pub(crate) fn standardize_value(chi2: f64, m: u64, convention: Convention) -> Result<f64> {
    let center = match convention {
        Convention::Theorem => m as f64,
        Convention::Classical => {
            if m < 2 {
                return Err(invalid_param(
                    "classical standardization needs at least 2 cells",
                ));
            }
            (m - 1) as f64
        }
    };
    Ok((chi2 - center) / (2.0 * center).sqrt())
}

/// Number of unordered coincident pairs, `sum_i N_i (N_i - 1) / 2`.
pub fn collision_pairs(c: &SampleCounts) -> u64 {
    c.cells.iter().map(|&(_, k)| k * (k - 1) / 2).sum()
}

/// Sequential terms `A_k = p^-1(X_k) / m * #{j < k : X_j = X_k}`, `A_1 = 0`.
pub fn sequential_a(d: &CellDistribution, s: &SampleSequence) -> Result<Vec<f64>> {
    check_dims(d, s.m)?;
    let m = d.m() as f64;
    let mut seen: HashMap<u64, u64> = HashMap::with_capacity(s.values.len());
    Ok(s.values
        .iter()
        .map(|&x| {
            let prior = seen.entry(x).or_insert(0);
            let a = *prior as f64 * d.inv_prob(x) / m;
            *prior += 1;
            a
        })
        .collect())
}
