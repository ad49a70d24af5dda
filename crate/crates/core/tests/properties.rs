use proptest::prelude::*;

use chi2_regimes::asymptotics::{a_moment_sums, bks_condition_values};
use chi2_regimes::stat::{
    chi_square, chi_square_dense, collision_pairs, decompose, s_statistic, sequential_a,
    u_statistic,
};
use chi2_regimes::{CellDistribution, LimitLaw, SampleSequence};

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn any_dist(max_m: u64) -> impl Strategy<Value = CellDistribution> {
    prop_oneof![
        (1..=max_m).prop_map(|m| CellDistribution::uniform(m).unwrap()),
        (0.0..0.99f64, 1..=max_m).prop_map(|(a, m)| CellDistribution::power_law(a, m).unwrap()),
        prop::collection::vec(0.01..10.0f64, 1..=(max_m.min(300) as usize))
            .prop_map(|w| CellDistribution::custom(normalized(w)).unwrap()),
    ]
}

fn dist_and_sequence(
    max_m: u64,
    max_n: usize,
) -> impl Strategy<Value = (CellDistribution, SampleSequence)> {
    any_dist(max_m).prop_flat_map(move |d| {
        let m = d.m();
        prop::collection::vec(1..=m, 1..=max_n)
            .prop_map(move |v| (d.clone(), SampleSequence::new(m, v).unwrap()))
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn probabilities_are_positive_and_normalized(d in any_dist(2000)) {
        let probs = d.probs();
        prop_assert!(probs.iter().all(|&p| p > 0.0));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn first_inverse_moment_is_m(d in any_dist(2000)) {
        let m = d.m() as f64;
        prop_assert!((d.inv_prob_moment(1.0).unwrap() - m).abs() <= 1e-9 * m);
    }

    #[test]
    fn inverse_moments_nondecreasing(d in any_dist(500), r0 in 0.1..1.0f64) {
        let mut prev = 0.0;
        for step in 0..8 {
            let r = r0 + 0.5 * step as f64;
            let cur = d.inv_prob_moment(r).unwrap();
            prop_assert!(cur >= prev * (1.0 - 1e-12), "r = {}: {} < {}", r, cur, prev);
            prev = cur;
        }
    }

    #[test]
    fn variance_positive_off_uniform(w in prop::collection::vec(0.01..10.0f64, 2..200)) {
        let spread = w.iter().cloned().fold(f64::MIN, f64::max) - w.iter().cloned().fold(f64::MAX, f64::min);
        let d = CellDistribution::custom(normalized(w)).unwrap();
        if spread > 1e-6 {
            prop_assert!(d.inv_prob_variance() > 0.0);
        }
        prop_assert!(d.inv_prob_variance() >= 0.0);
    }

    #[test]
    fn variance_zero_on_uniform(m in 1u64..100_000) {
        prop_assert_eq!(CellDistribution::uniform(m).unwrap().inv_prob_variance(), 0.0);
        prop_assert_eq!(CellDistribution::power_law(0.0, m).unwrap().inv_prob_variance(), 0.0);
    }

    #[test]
    fn equal_custom_weights_have_no_spread(m in 1usize..500) {
        let d = CellDistribution::custom(vec![1.0 / m as f64; m]).unwrap();
        let mm = m as f64;
        prop_assert!(d.inv_prob_variance() <= 1e-9 * mm * mm);
    }

    #[test]
    fn flat_power_law_is_uniform(m in 1u64..5000) {
        let d = CellDistribution::power_law(0.0, m).unwrap();
        let u = CellDistribution::uniform(m).unwrap();
        for i in [1, m / 2 + 1, m] {
            prop_assert_eq!(d.prob(i), u.prob(i));
        }
    }

    #[test]
    fn decomposition_identity((d, s) in dist_and_sequence(1000, 2000)) {
        let b = decompose(&d, &s.to_counts()).unwrap();
        prop_assert!(b.identity_residual().abs() <= 1e-9 * (1.0 + b.chi2.abs()));
    }

    #[test]
    fn uniform_s_is_nm((m, v) in (1u64..1000).prop_flat_map(|m| (Just(m), prop::collection::vec(1..=m, 1..2000)))) {
        let d = CellDistribution::uniform(m).unwrap();
        let c = SampleSequence::new(m, v).unwrap().to_counts();
        let n = c.n() as f64;
        let mf = m as f64;
        prop_assert_eq!(s_statistic(&d, &c).unwrap(), n * mf);
        let u = u_statistic(&d, &c).unwrap();
        prop_assert_eq!(u, 2.0 * mf * collision_pairs(&c) as f64);
        let x = chi_square(&d, &c).unwrap();
        prop_assert!(rel_close(x, u / n + mf - n, 1e-12));
    }

    #[test]
    fn sequential_identity((d, s) in dist_and_sequence(100, 1000)) {
        let a: f64 = sequential_a(&d, &s).unwrap().iter().sum();
        let u = u_statistic(&d, &s.to_counts()).unwrap();
        prop_assert!(rel_close(a, u / (2.0 * d.m() as f64), 1e-9));
    }

    #[test]
    fn depends_only_on_counts((d, s) in dist_and_sequence(200, 500), shift in 0usize..500) {
        let mut v = s.values().to_vec();
        v.reverse();
        let k = shift % v.len();
        v.rotate_left(k);
        let t = SampleSequence::new(d.m(), v).unwrap();
        prop_assert_eq!(chi_square(&d, &s.to_counts()).unwrap(), chi_square(&d, &t.to_counts()).unwrap());
    }

    #[test]
    fn sparse_matches_dense((d, s) in dist_and_sequence(1000, 3000)) {
        let c = s.to_counts();
        let sparse = chi_square(&d, &c).unwrap();
        let dense = chi_square_dense(&d, &c).unwrap();
        prop_assert!(rel_close(sparse, dense, 1e-10), "{} vs {}", sparse, dense);
    }

    #[test]
    fn first_a_moment_equals_bks_sum(d in any_dist(5000), n in 1u64..1_000_000) {
        let (a1, _, _) = a_moment_sums(&d, n).unwrap();
        let (_, bks) = bks_condition_values(n, d.m()).unwrap();
        prop_assert!(rel_close(a1, bks, 1e-15));
    }

    #[test]
    fn limit_cdfs_monotone(lambda in 0.2..20.0f64) {
        for law in [LimitLaw::StdNormal, LimitLaw::DegenerateZero, LimitLaw::poisson(lambda).unwrap()] {
            let mut prev = 0.0;
            for i in -400..=400 {
                let x = i as f64 * 0.05;
                let f = law.cdf(x);
                prop_assert!(f >= prev && (0.0..=1.0).contains(&f));
                prop_assert!(law.cdf_left(x) <= f);
                prev = f;
            }
            prop_assert!(law.cdf(-1e6) < 1e-12);
            prop_assert!(law.cdf(1e6) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn poisson_quantile_recovers_atoms(lambda in 0.2..20.0f64) {
        let law = LimitLaw::poisson(lambda).unwrap();
        let mean = lambda * lambda / 2.0;
        for k in 0..50u64 {
            let x = LimitLaw::atom(lambda, k);
            let f = law.cdf(x);
            if f >= 1.0 {
                break;
            }
            // skip atoms whose mass is below one ulp of the CDF
            if f - law.cdf_left(x) <= 4.0 * f64::EPSILON || (k as f64) > mean + 40.0 * mean.sqrt() + 40.0 {
                continue;
            }
            let q = law.quantile(f).unwrap();
            prop_assert!((q - x).abs() <= 1e-9 * (1.0 + x.abs()), "k = {}: {} vs {}", k, q, x);
        }
    }

    #[test]
    fn p_value_complements_quantile(q in 0.001..0.999f64, lambda in 0.2..20.0f64) {
        let x = LimitLaw::StdNormal.quantile(q).unwrap();
        prop_assert!((LimitLaw::StdNormal.p_value_upper(x) + q - 1.0).abs() <= 1e-9);
        let law = LimitLaw::poisson(lambda).unwrap();
        let x = law.quantile(q).unwrap();
        prop_assert!(law.p_value_upper(x) + q >= 1.0 - 1e-12);
    }
}

#[test]
fn poisson_laws_are_standardized() {
    let mut lambdas: Vec<f64> = (1..=100).map(|i| 0.2 * i as f64).collect();
    lambdas.push(std::f64::consts::SQRT_2);
    for lambda in lambdas {
        let atoms = LimitLaw::poisson(lambda).unwrap().atoms(1e-18);
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        assert!(mass > 1.0 - 1e-12);
        let mean: f64 = atoms.iter().map(|(x, p)| x * p).sum();
        let var: f64 = atoms.iter().map(|(x, p)| (x - mean).powi(2) * p).sum();
        assert!(mean.abs() < 1e-9, "lambda {lambda}: mean {mean}");
        assert!((var - 1.0).abs() < 1e-9, "lambda {lambda}: var {var}");
    }
}
