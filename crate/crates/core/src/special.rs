//! Normal, Poisson and incomplete-gamma tail functions.
//!
//! `erfc` comes from `libm`; `erfc_inv` and `ln_gamma` from `statrs`. The
//! regularized incomplete gamma function is evaluated here with a log-space
//! prefactor built on `ln(1+t) - t`, which keeps full absolute accuracy when
//! both arguments are in the millions (chi-square with up to 1e7 degrees of
//! freedom).

use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use std::f64::consts::{LN_2, PI, SQRT_2};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail `P(N > x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal quantile for `0 < q < 1`.
pub fn normal_quantile(q: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * q)
}

/// `ln(1 + t) - t` without cancellation near `t = 0`.
fn log1pmx(t: f64) -> f64 {
    if t.abs() > 0.5 {
        return t.ln_1p() - t;
    }
    // -t^2/2 + t^3/3 - t^4/4 + ...
    let mut term = t;
    let mut sum = 0.0;
    let mut k = 2.0;
    loop {
        term *= -t;
        let add = term / k;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Stirling remainder `ln Gamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2]`, for
/// `a >= 10`.
fn stirling_remainder(a: f64) -> f64 {
    let a2 = a * a;
    (1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * a2)) / a2) / a2) / a2)
        / a
}

/// `ln(x^a e^-x / Gamma(a))`.
fn ln_gamma_prefix(a: f64, x: f64) -> f64 {
    if a < 10.0 {
        return a * x.ln() - x - ln_gamma(a);
    }
    let t = (x - a) / a;
    a * log1pmx(t) + 0.5 * (a.ln() - LN_2 - PI.ln()) - stirling_remainder(a)
}

const MAX_ITER: usize = 100_000_000;

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))`, `a > 0`, `x >= 0`.
pub fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let ln_prefix = ln_gamma_prefix(a, x);
    if x < a + 1.0 {
        // series for P
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let p = (sum.ln() + ln_prefix).exp().min(1.0);
        (p, 1.0 - p)
    } else {
        // modified Lentz continued fraction for Q
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (h.ln() + ln_prefix).exp().min(1.0);
        (1.0 - q, q)
    }
}

/// Upper tail of the chi-square law with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_pq(0.5 * df, 0.5 * x).1
}

/// Poisson means above this are handled in log space.
pub const POISSON_LOG_SPACE_MEAN: f64 = 700.0;

/// `P(Z = k)` for `Z ~ Pois(mean)`.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (k * mean.ln() - mean - ln_gamma(k + 1.0)).exp()
}

/// First index of the summation window for `Pois(mean)`: below it the mass
/// is under `e^-600` and the log pmf stays above the underflow threshold.
fn window_start(mean: f64) -> u64 {
    if mean <= POISSON_LOG_SPACE_MEAN {
        0
    } else {
        (mean - 34.0 * mean.sqrt()).max(0.0).floor() as u64
    }
}

/// `P(Z <= k)`, by pmf recursion from the start of the window.
pub fn poisson_cdf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return 1.0;
    }
    let start = window_start(mean);
    if k < start {
        return 0.0;
    }
    let mut term = if start == 0 {
        (-mean).exp()
    } else {
        poisson_pmf(start, mean)
    };
    let mut sum = term;
    let mut j = start;
    while j < k {
        j += 1;
        term *= mean / j as f64;
        sum += term;
        if j as f64 > mean && term < 1e-18 * sum {
            break;
        }
    }
    sum.min(1.0)
}

/// `P(Z >= k)`; summed directly above the mean to keep small tails accurate.
pub fn poisson_sf(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    if (k as f64) <= mean {
        return (1.0 - poisson_cdf(k - 1, mean)).max(0.0);
    }
    let mut term = poisson_pmf(k, mean);
    let mut sum = term;
    let mut j = k;
    while term > 1e-18 * sum && term > 0.0 {
        j += 1;
        term *= mean / j as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Smallest `K` such that `P(Z > K) < tail`.
pub fn poisson_upper_cutoff(mean: f64, tail: f64) -> u64 {
    let mut k = mean.floor() as u64;
    while poisson_sf(k + 1, mean) >= tail {
        k += 1;
    }
    k
}
