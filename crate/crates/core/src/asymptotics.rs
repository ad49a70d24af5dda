//! Exact finite-`n` theory values: moments of the statistic and of its
//! components, the moment sums of the sequential terms `A_{n,k}`, and the
//! instantiated conditions of the Poisson (conditional) and martingale
//! limit theorems.
//!
//! Sums over `k = 1..n` use closed-form falling-factorial identities,
//! evaluated in `u128`, so `n` may go far beyond loop range:
//!
//! ```text
//! sum (k-1)             = n(n-1)/2
//! sum (k-1)(k-2)        = n(n-1)(n-2)/3
//! sum (k-1)(k-2)(k-3)   = n(n-1)(n-2)(n-3)/4
//! ```

use serde::{Deserialize, Serialize};

use crate::dist::{CellDistribution, Family};
use crate::error::{invalid_param, Result};
use crate::limits::lambda_hat;

/// `sum_{k=1}^n (k-1)(k-2)...(k-j)` for `j = 1, 2, 3`.
///
/// Exact in `u128` while the product fits (`n` up to about 1.3e9 for
/// `j = 3`), in `f64` beyond.
pub fn falling_factorial_sum(n: u64, j: u32) -> f64 {
    assert!(
        (1..=3).contains(&j),
        "falling factorial sums are provided for j = 1, 2, 3"
    );
    let terms = (0..=j as u128).map(|i| (n as u128).saturating_sub(i));
    let den = (j + 1) as u128;
    match terms.clone().try_fold(1u128, |acc, t| acc.checked_mul(t)) {
        Some(num) => (num / den) as f64,
        None => terms.map(|t| t as f64).product::<f64>() / den as f64,
    }
}

/// `E chi2 = m - 1`.
pub fn chi2_mean(m: u64) -> f64 {
    m as f64 - 1.0
}

/// `Var chi2 = [Var p^-1(X) + 2(n-1)(m-1)] / n`.
pub fn chi2_variance(d: &CellDistribution, n: u64) -> Result<f64> {
    check_n(n)?;
    let n_f = n as f64;
    Ok((d.inv_prob_variance() + 2.0 * (n_f - 1.0) * (d.m() as f64 - 1.0)) / n_f)
}

/// `E U_n = n(n-1)`.
pub fn mean_u(n: u64) -> f64 {
    n as f64 * (n as f64 - 1.0)
}

/// `E S_n = n m`.
pub fn mean_s(d: &CellDistribution, n: u64) -> f64 {
    n as f64 * d.m() as f64
}

/// `Var S_n = n Var p^-1(X)`.
pub fn var_s(d: &CellDistribution, n: u64) -> f64 {
    n as f64 * d.inv_prob_variance()
}

/// `Var U_n = 2 n (n-1) (m-1)`, the remainder of `n^2 Var chi2` after
/// `Var S_n` (the two components are uncorrelated).
pub fn var_u(d: &CellDistribution, n: u64) -> f64 {
    2.0 * n as f64 * (n as f64 - 1.0) * (d.m() as f64 - 1.0)
}

/// Exact `(sum_k E A_k, sum_k E A_k^2, sum_k E A_k^3)`.
///
/// Given `X_k`, `m p(X_k) A_k ~ Binom(k-1, p(X_k))`, so with
/// `r = k - 1`:
/// `E A = r/m`, `E A^2 = [r m + r(r-1)]/m^2`,
/// `E A^3 = [r E p^-2 + 3 r(r-1) m + r(r-1)(r-2)]/m^3`.
pub fn a_moment_sums(d: &CellDistribution, n: u64) -> Result<(f64, f64, f64)> {
    check_n(n)?;
    let m = d.m() as f64;
    let s1 = falling_factorial_sum(n, 1);
    let s2 = falling_factorial_sum(n, 2);
    let s3 = falling_factorial_sum(n, 3);
    let e_inv2 = d.inv_prob_moment(2.0)?;
    let first = s1 / m;
    let second = (s1 * m + s2) / (m * m);
    let third = (s1 * e_inv2 + 3.0 * s2 * m + s3) / (m * m * m);
    Ok((first, second, third))
}

/// `(max_k E(A_k | F_{k-1}), sum_k E(A_k | F_{k-1})) = ((n-1)/m, n(n-1)/(2m))`.
///
/// Both conditional expectations are deterministic.
pub fn bks_condition_values(n: u64, m: u64) -> Result<(f64, f64)> {
    check_n(n)?;
    if m == 0 {
        return Err(invalid_param("number of cells m must be at least 1"));
    }
    let m = m as f64;
    Ok(((n - 1) as f64 / m, falling_factorial_sum(n, 1) / m))
}

/// Moment bound on the truncated sum,
/// `eps^-2 (sum E A^3 - 2 sum E A^2 + sum E A)`.
///
/// Returned as-is; it can be negative before the asymptotic regime.
pub fn poisson_truncation_bound(d: &CellDistribution, n: u64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid_param(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let (a1, a2, a3) = a_moment_sums(d, n)?;
    Ok((a3 - 2.0 * a2 + a1) / (epsilon * epsilon))
}

/// Constant-free rate terms of the Lyapunov condition:
/// `n^-delta m^-(1+delta/2) E p^-(1+delta)` and
/// `n^-(delta/2) m^-(1+delta/2) E p^-(1+delta/2)`.
pub fn lyapunov_rate_terms(d: &CellDistribution, n: u64, delta: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid_param(format!(
            "delta must be positive and finite, got {delta}"
        )));
    }
    let n = n as f64;
    let m = d.m() as f64;
    let scale = m.powf(-(1.0 + 0.5 * delta));
    let first = n.powf(-delta) * scale * d.inv_prob_moment(1.0 + delta)?;
    let second = n.powf(-0.5 * delta) * scale * d.inv_prob_moment(1.0 + 0.5 * delta)?;
    Ok((first, second))
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid_param("sample size n must be at least 1"));
    }
    Ok(())
}

/// Moment bound with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBound {
    pub epsilon: f64,
    pub value: f64,
    /// Set when the raw value is below zero (small `n`).
    pub negative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NovndValue {
    pub delta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovTerms {
    pub delta: f64,
    pub first: f64,
    pub second: f64,
}

/// All exact theory values for one `(distribution, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub n: u64,
    pub m: u64,
    pub family: Family,
    pub lambda_hat: f64,
    pub chi2_mean: f64,
    pub chi2_var: f64,
    pub mean_u: f64,
    pub mean_s: f64,
    pub var_u: f64,
    pub var_s: f64,
    pub a_sum_mean: f64,
    pub a_sum_m2: f64,
    pub a_sum_m3: f64,
    pub bks_max_cond: f64,
    pub bks_sum_cond: f64,
    pub truncation_bound: TruncationBound,
    pub condition_c: f64,
    pub novnd: NovndValue,
    pub lyapunov: LyapunovTerms,
}

impl TheoryReport {
    pub fn compute(d: &CellDistribution, n: u64, delta: f64, epsilon: f64) -> Result<Self> {
        let (a1, a2, a3) = a_moment_sums(d, n)?;
        let (bks_max, bks_sum) = bks_condition_values(n, d.m())?;
        let bound = poisson_truncation_bound(d, n, epsilon)?;
        let (ly1, ly2) = lyapunov_rate_terms(d, n, delta)?;
        Ok(TheoryReport {
            n,
            m: d.m(),
            family: d.family(),
            lambda_hat: lambda_hat(n, d.m()),
            chi2_mean: chi2_mean(d.m()),
            chi2_var: chi2_variance(d, n)?,
            mean_u: mean_u(n),
            mean_s: mean_s(d, n),
            var_u: var_u(d, n),
            var_s: var_s(d, n),
            a_sum_mean: a1,
            a_sum_m2: a2,
            a_sum_m3: a3,
            bks_max_cond: bks_max,
            bks_sum_cond: bks_sum,
            truncation_bound: TruncationBound {
                epsilon,
                value: bound,
                negative: bound < 0.0,
            },
            condition_c: d.condition_c_ratio(n)?,
            novnd: NovndValue {
                delta,
                value: d.novnd_ratio(delta)?,
            },
            lyapunov: LyapunovTerms {
                delta,
                first: ly1,
                second: ly2,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(m: u64) -> CellDistribution {
        CellDistribution::uniform(m).unwrap()
    }

    #[test]
    fn falling_sums_match_loops() {
        for n in [1u64, 2, 3, 4, 17, 1000, 100_000] {
            let (mut l1, mut l2, mut l3) = (0u128, 0u128, 0u128);
            for k in 1..=n as u128 {
                let r = k - 1;
                l1 += r;
                l2 += r * r.saturating_sub(1);
                l3 += r * r.saturating_sub(1) * r.saturating_sub(2);
            }
            assert_eq!(falling_factorial_sum(n, 1), l1 as f64);
            assert_eq!(falling_factorial_sum(n, 2), l2 as f64);
            assert_eq!(falling_factorial_sum(n, 3), l3 as f64);
        }
        // feasible well past loop range
        assert!(falling_factorial_sum(1_000_000_000, 3).is_finite());
        let big = falling_factorial_sum(u64::MAX / 2, 3);
        let approx = (u64::MAX / 2) as f64;
        assert!((big / (approx.powi(4) / 4.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi2_moments() {
        assert_eq!(chi2_mean(1), 0.0);
        assert_eq!(chi2_mean(100), 99.0);
        assert_eq!(chi2_variance(&uniform(2), 2).unwrap(), 1.0);
        assert_eq!(chi2_variance(&uniform(9), 1).unwrap(), 0.0);
        let d = CellDistribution::custom(vec![0.5, 0.25, 0.25]).unwrap();
        assert!((chi2_variance(&d, 2).unwrap() - 2.5).abs() < 1e-12);
        assert!((chi2_variance(&d, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mean_u(10), 90.0);
        assert_eq!(mean_u(1), 0.0);
        assert_eq!(mean_s(&uniform(5), 4), 20.0);
    }

    #[test]
    fn a_sums_small_and_reference() {
        assert_eq!(a_moment_sums(&uniform(7), 1).unwrap(), (0.0, 0.0, 0.0));
        let (a1, a2, _) = a_moment_sums(&uniform(2), 3).unwrap();
        assert_eq!((a1, a2), (1.5, 2.0));
        let (a1, a2, a3) = a_moment_sums(&uniform(10_000), 100).unwrap();
        assert_eq!(a1, 0.495);
        assert!((a2 - 0.498_234).abs() < 1e-12);
        assert!((a3 - 0.504_725_527_35).abs() < 1e-12);
        for v in [a1, a2, a3] {
            assert!((v - 0.5).abs() <= 0.03 * 0.5);
        }
    }

    #[test]
    fn bks_values() {
        let (mx, sm) = bks_condition_values(100, 10_000).unwrap();
        assert!((mx - 0.0099).abs() < 1e-15);
        assert_eq!(sm, 0.495);
        assert_eq!(bks_condition_values(1, 5).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn truncation_bound() {
        assert_eq!(poisson_truncation_bound(&uniform(3), 1, 0.5).unwrap(), 0.0);
        let d = uniform(10_000);
        let (a1, a2, a3) = a_moment_sums(&d, 100).unwrap();
        let b = poisson_truncation_bound(&d, 100, 0.5).unwrap();
        assert_eq!(b, 4.0 * (a3 - 2.0 * a2 + a1));
        let along: Vec<f64> = [100u64, 1000, 10_000]
            .iter()
            .map(|&n| poisson_truncation_bound(&uniform(n * n), n, 0.5).unwrap())
            .collect();
        assert!(along.windows(2).all(|w| w[1] < w[0]), "{along:?}");
        assert!(poisson_truncation_bound(&d, 10, 0.0).is_err());
    }

    #[test]
    fn lyapunov_terms() {
        let (first, second) = lyapunov_rate_terms(&uniform(100), 2000, 1.0).unwrap();
        assert!((first - 0.005).abs() < 1e-15);
        assert!((second - 2000f64.powf(-0.5)).abs() < 1e-15);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for m in [100u64, 1000, 10_000] {
            let t = lyapunov_rate_terms(&uniform(m), m, 1.0).unwrap();
            assert!(t.0 < prev.0 && t.1 < prev.1);
            prev = t;
        }
        for delta in [0.3, 1.0, 2.5] {
            assert_eq!(
                lyapunov_rate_terms(&uniform(1), 1, delta).unwrap(),
                (1.0, 1.0)
            );
        }
    }

    #[test]
    fn report_invariants() {
        let d = CellDistribution::power_law(0.4, 300).unwrap();
        let r = TheoryReport::compute(&d, 50, 1.0, 0.5).unwrap();
        assert_eq!(r.chi2_mean, 299.0);
        assert_eq!(r.a_sum_mean, 50.0 * 49.0 / 600.0);
        assert_eq!(r.a_sum_mean, r.bks_sum_cond);
        let r1 = TheoryReport::compute(&uniform(10), 1, 1.0, 0.5).unwrap();
        assert_eq!((r1.a_sum_mean, r1.a_sum_m2, r1.a_sum_m3), (0.0, 0.0, 0.0));
        assert_eq!(r1.truncation_bound.value, 0.0);
    }
}
