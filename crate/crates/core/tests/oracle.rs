//! Exact moments against exhaustive enumeration of every outcome sequence.

use chi2_regimes::asymptotics::{a_moment_sums, chi2_mean, chi2_variance};
use chi2_regimes::stat::{chi_square, sequential_a};
use chi2_regimes::{CellDistribution, SampleSequence};

struct Enumerated {
    chi2_mean: f64,
    chi2_var: f64,
    a_sums: (f64, f64, f64),
}

fn enumerate(d: &CellDistribution, n: u32) -> Enumerated {
    let m = d.m();
    let total = m.pow(n);
    let (mut e1, mut e2) = (0.0, 0.0);
    let (mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0);
    for code in 0..total {
        let mut c = code;
        let values: Vec<u64> = (0..n)
            .map(|_| {
                let v = c % m + 1;
                c /= m;
                v
            })
            .collect();
        let w: f64 = values.iter().map(|&v| d.prob(v)).product();
        let seq = SampleSequence::new(m, values).unwrap();
        let x = chi_square(d, &seq.to_counts()).unwrap();
        e1 += w * x;
        e2 += w * x * x;
        for a in sequential_a(d, &seq).unwrap() {
            a1 += w * a;
            a2 += w * a * a;
            a3 += w * a * a * a;
        }
    }
    Enumerated {
        chi2_mean: e1,
        chi2_var: e2 - e1 * e1,
        a_sums: (a1, a2, a3),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

fn check(d: &CellDistribution, n: u32) {
    let got = enumerate(d, n);
    let (a1, a2, a3) = a_moment_sums(d, n as u64).unwrap();
    let var = chi2_variance(d, n as u64).unwrap();
    assert!(close(got.chi2_mean, chi2_mean(d.m())), "mean {d:?} n={n}");
    assert!(
        close(got.chi2_var, var),
        "var {d:?} n={n}: {} vs {var}",
        got.chi2_var
    );
    assert!(close(got.a_sums.0, a1), "sum E A, n={n}");
    assert!(close(got.a_sums.1, a2), "sum E A^2, n={n}");
    assert!(close(got.a_sums.2, a3), "sum E A^3, n={n}");
}

#[test]
fn two_cells_uniform() {
    let d = CellDistribution::uniform(2).unwrap();
    for n in 1..=4 {
        check(&d, n);
    }
}

#[test]
fn two_cells_skewed() {
    let d = CellDistribution::custom(vec![0.75, 0.25]).unwrap();
    for n in 1..=4 {
        check(&d, n);
    }
}

#[test]
fn three_cells_custom_and_power_law() {
    let d = CellDistribution::custom(vec![0.5, 0.25, 0.25]).unwrap();
    for n in 1..=5 {
        check(&d, n);
    }
    let d = CellDistribution::power_law(0.5, 4).unwrap();
    for n in 1..=5 {
        check(&d, n);
    }
}

#[test]
fn nine_outcome_variance() {
    // n = 2 over [1/2, 1/4, 1/4]: nine ordered pairs
    let d = CellDistribution::custom(vec![0.5, 0.25, 0.25]).unwrap();
    assert!(close(enumerate(&d, 2).chi2_var, 2.5));
}
