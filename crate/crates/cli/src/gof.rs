//! Goodness-of-fit report on observed counts.

use serde::Serialize;

use chi2_regimes::limits::{classical_chi2_p_value, classify_regime};
use chi2_regimes::special::{normal_sf, poisson_sf};
use chi2_regimes::stat::{decompose, standardize};
use chi2_regimes::{
    CellDistribution, Convention, Family, LimitLaw, Result, SampleCounts, Thresholds,
};

/// Above this `condition_c` ratio the `S_n` term is not negligible.
pub const CONDITION_C_WARN: f64 = 0.1;

/// Points are treated as lattice atoms within this relative distance.
const ATOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub tool_version: String,
    pub distribution: Family,
    pub n: u64,
    pub m: u64,
    pub chi2: f64,
    pub u: f64,
    pub s: f64,
    pub lambda_hat: f64,
    /// Recommended reference; the three p-values are always reported.
    pub regime: LimitLaw,
    pub thresholds: Thresholds,
    pub convention: Convention,
    pub standardized: f64,
    pub standardized_theorem: f64,
    /// Absent for a single cell.
    pub standardized_classical: Option<f64>,
    /// `P(chi2_{m-1} >= chi2)`.
    pub p_classical: f64,
    /// `P(N(0,1) >= standardized)`.
    pub p_normal: f64,
    /// `P(Pois(n(n-1)/(2m)) >= k)`, `k` the lattice position of the
    /// statistic (the collision count for uniform cells).
    pub p_poisson: f64,
    pub poisson_mean: f64,
    pub lattice_index: f64,
    pub condition_c: f64,
    pub warnings: Vec<String>,
}

pub fn gof_report(
    d: &CellDistribution,
    counts: &SampleCounts,
    convention: Convention,
    thresholds: Thresholds,
) -> Result<GofReport> {
    let b = decompose(d, counts)?;
    let (n, m) = (counts.n(), d.m());
    let class = classify_regime(n, m, thresholds.lambda_lo, thresholds.lambda_hi)?;
    let theorem = standardize(&b, Convention::Theorem)?;
    let classical = if m >= 2 {
        Some(standardize(&b, Convention::Classical)?)
    } else {
        None
    };
    let standardized = match convention {
        Convention::Theorem => theorem,
        Convention::Classical => classical.ok_or_else(|| {
            chi2_regimes::Error::InvalidParameter(
                "classical standardization needs at least 2 cells".into(),
            )
        })?,
    };

    let mut warnings = Vec::new();
    let p_classical = if m >= 2 {
        classical_chi2_p_value(b.chi2.max(0.0), m - 1)?
    } else {
        warnings.push("single cell: the classical reference has no degrees of freedom".into());
        1.0
    };

    let (nf, mf) = (n as f64, m as f64);
    let poisson_mean = nf * (nf - 1.0) / (2.0 * mf);
    let lattice_index = nf / (2.0 * mf).sqrt() * theorem + nf * nf / (2.0 * mf);
    let first = (lattice_index - ATOM_TOL * lattice_index.abs().max(1.0)).ceil();
    let p_poisson = if first <= 0.0 {
        1.0
    } else if poisson_mean == 0.0 {
        0.0
    } else {
        poisson_sf(first as u64, poisson_mean)
    };

    let condition_c = d.condition_c_ratio(n)?;
    if condition_c > CONDITION_C_WARN {
        warnings.push(format!(
            "condition_c = {condition_c:.4} exceeds {CONDITION_C_WARN}: the inverse-probability sum is not negligible and regime limits may be inaccurate"
        ));
    }
    for (name, t) in [
        ("lambda_lo", thresholds.lambda_lo),
        ("lambda_hi", thresholds.lambda_hi),
    ] {
        let lh = class.lambda_hat;
        if lh >= t / 2.0 && lh <= 2.0 * t {
            warnings.push(format!(
                "lambda_hat = {lh:.4} is within a factor 2 of {name} = {t}: the regime recommendation is borderline"
            ));
        }
    }

    Ok(GofReport {
        tool_version: chi2_regimes::VERSION.to_string(),
        distribution: d.family(),
        n,
        m,
        chi2: b.chi2,
        u: b.u_stat,
        s: b.s_stat,
        lambda_hat: class.lambda_hat,
        regime: class.regime,
        thresholds,
        convention,
        standardized,
        standardized_theorem: theorem,
        standardized_classical: classical,
        p_classical,
        p_normal: normal_sf(standardized),
        p_poisson: p_poisson.clamp(0.0, 1.0),
        poisson_mean,
        lattice_index,
        condition_c,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(d: &CellDistribution, pairs: Vec<(u64, u64)>) -> GofReport {
        let c = SampleCounts::new(d.m(), pairs).unwrap();
        gof_report(d, &c, Convention::Theorem, Thresholds::default()).unwrap()
    }

    #[test]
    fn two_cell_example() {
        let d = CellDistribution::uniform(2).unwrap();
        let r = report(&d, vec![(1, 3), (2, 1)]);
        assert!((r.chi2 - 1.0).abs() < 1e-12);
        assert!((r.p_classical - 0.317_310_507_862_911_15).abs() < 1e-6);
    }

    #[test]
    fn perfect_fit() {
        let d = CellDistribution::uniform(4).unwrap();
        let r = report(&d, vec![(1, 5), (2, 5), (3, 5), (4, 5)]);
        assert_eq!(r.chi2, 0.0);
        assert!((r.p_classical - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_collision_poisson_tail() {
        let d = CellDistribution::uniform(10_000).unwrap();
        let mut pairs: Vec<(u64, u64)> = (1..=98).map(|i| (i, 1)).collect();
        pairs.push((99, 2));
        let r = report(&d, pairs);
        assert_eq!(r.n, 100);
        assert_eq!(r.lambda_hat, 1.0);
        assert_eq!(r.regime, LimitLaw::PoissonRegime { lambda: 1.0 });
        assert!((r.lattice_index - 1.0).abs() < 1e-9);
        assert!((r.p_poisson - (1.0 - (-0.495f64).exp())).abs() < 1e-12);
        assert!((r.p_poisson - 0.3904).abs() < 1e-4);
    }

    #[test]
    fn warnings_fire() {
        // lambda_hat = 10 sits on the upper threshold
        let d = CellDistribution::uniform(100).unwrap();
        let r = report(&d, (1..=100).map(|i| (i, 1)).collect());
        assert!(r.warnings.iter().any(|w| w.contains("lambda_hi")));
        let d = CellDistribution::custom(vec![0.9, 0.05, 0.05]).unwrap();
        let r = report(&d, vec![(1, 1), (2, 1)]);
        assert!(r.warnings.iter().any(|w| w.contains("condition_c")));
    }

    #[test]
    fn p_values_in_unit_interval() {
        let d = CellDistribution::power_law(0.5, 50).unwrap();
        let r = report(&d, vec![(1, 40), (3, 2), (50, 9)]);
        for p in [r.p_classical, r.p_normal, r.p_poisson] {
            assert!((0.0..=1.0).contains(&p));
        }
    }
}
