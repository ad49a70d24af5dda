//! Distances between empirical samples and reference laws.

use std::collections::BTreeMap;

use crate::error::{invalid_param, Error, Result};
use crate::limits::LimitLaw;
use crate::special;

/// Atoms lighter than this are ignored when scanning discrete laws.
pub const ATOM_MIN_MASS: f64 = 1e-12;

/// Poisson tail mass left outside the explicit TV sum.
pub const TV_TAIL: f64 = 1e-9;

/// Kolmogorov-Smirnov distance `sup_x |F_emp(x) - F_law(x)|`.
///
/// Both sides are right-continuous step or continuous functions, so the
/// supremum is reached at, or just left of, a jump of either one: every
/// sample point and every law atom of mass at least [`ATOM_MIN_MASS`] is
/// checked from both sides. Samples within rounding distance of an atom are
/// moved onto it first.
pub fn ks_distance(samples: &[f64], law: &LimitLaw) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "KS distance needs at least one sample".into(),
        ));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("samples contain NaN".into()));
    }
    let mut xs: Vec<f64> = samples.iter().map(|&x| law.snap_to_atom(x)).collect();
    xs.sort_unstable_by(f64::total_cmp);
    let r = xs.len() as f64;

    let mut points: Vec<f64> = xs.clone();
    points.extend(law.atoms(ATOM_MIN_MASS).into_iter().map(|(x, _)| x));
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();

    let mut d: f64 = 0.0;
    for t in points {
        let below = xs.partition_point(|&x| x < t) as f64 / r;
        let at = xs.partition_point(|&x| x <= t) as f64 / r;
        d = d.max((at - law.cdf(t)).abs());
        d = d.max((below - law.cdf_left(t)).abs());
    }
    Ok(d.min(1.0))
}

/// Total variation distance between the empirical law of `counts` and
/// `Pois(mean)`.
pub fn tv_distance_poisson(counts: &[u64], mean: f64) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::InvalidInput(
            "TV distance needs at least one count".into(),
        ));
    }
    let mut hist = BTreeMap::new();
    for &c in counts {
        *hist.entry(c).or_insert(0u64) += 1;
    }
    tv_from_histogram(&hist, counts.len() as u64, mean)
}

/// As [`tv_distance_poisson`], from a histogram `value -> frequency`.
pub fn tv_from_histogram(hist: &BTreeMap<u64, u64>, total: u64, mean: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid_param(format!(
            "Poisson mean must be positive and finite, got {mean}"
        )));
    }
    if total == 0 {
        return Err(Error::InvalidInput("empty histogram".into()));
    }
    let max_seen = hist.keys().next_back().copied().unwrap_or(0);
    let cutoff = special::poisson_upper_cutoff(mean, TV_TAIL).max(max_seen);
    let r = total as f64;
    let mut sum = 0.0;
    for k in 0..=cutoff {
        let emp = hist.get(&k).copied().unwrap_or(0) as f64 / r;
        sum += (emp - special::poisson_pmf(k, mean)).abs();
    }
    let tail = special::poisson_sf(cutoff + 1, mean);
    Ok((0.5 * (sum + tail)).min(1.0))
}

/// Empirical CDF accumulated on a fixed grid, for runs too long to keep
/// every replicate.
#[derive(Debug, Clone)]
pub struct GridCdf {
    lo: f64,
    hi: f64,
    /// `bins[j]` counts samples in `(g_{j-1}, g_j]`; the last slot holds
    /// samples above the grid.
    bins: Vec<u64>,
    total: u64,
}

pub const GRID_POINTS: usize = 4096;
pub const GRID_HALF_WIDTH: f64 = 8.0;

impl Default for GridCdf {
    fn default() -> Self {
        GridCdf::new(-GRID_HALF_WIDTH, GRID_HALF_WIDTH, GRID_POINTS)
    }
}

impl GridCdf {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        assert!(points >= 2 && lo < hi);
        GridCdf {
            lo,
            hi,
            bins: vec![0; points + 1],
            total: 0,
        }
    }

    fn points(&self) -> usize {
        self.bins.len() - 1
    }

    fn grid(&self, j: usize) -> f64 {
        self.lo + (self.hi - self.lo) * j as f64 / (self.points() - 1) as f64
    }

    pub fn push(&mut self, x: f64) {
        let p = self.points();
        let pos = (x - self.lo) / (self.hi - self.lo) * (p - 1) as f64;
        let mut j = if pos <= 0.0 {
            0
        } else if pos > (p - 1) as f64 {
            p
        } else {
            pos.ceil() as usize
        };
        // guard the ceil against rounding at grid points
        while j > 0 && j < p && self.grid(j - 1) >= x {
            j -= 1;
        }
        while j < p && self.grid(j) < x {
            j += 1;
        }
        self.bins[j] += 1;
        self.total += 1;
    }

    /// `max_j |F_emp(g_j) - F_law(g_j)|` over the grid points.
    pub fn ks(&self, law: &LimitLaw) -> f64 {
        let r = self.total as f64;
        let mut cum = 0u64;
        let mut d: f64 = 0.0;
        for j in 0..self.points() {
            cum += self.bins[j];
            d = d.max((cum as f64 / r - law.cdf(self.grid(j))).abs());
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_degenerate_exact_match() {
        assert_eq!(
            ks_distance(&[0.0; 10], &LimitLaw::DegenerateZero).unwrap(),
            0.0
        );
        assert!(ks_distance(&[], &LimitLaw::StdNormal).is_err());
    }

    #[test]
    fn ks_two_points_vs_normal() {
        let d = ks_distance(&[-1.0, 1.0], &LimitLaw::StdNormal).unwrap();
        // |0.5 - Phi(-1)|
        assert!((d - 0.341_344_746_068_542_9).abs() < 1e-4);
    }

    #[test]
    fn ks_normal_draws_within_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| LimitLaw::StdNormal.sample(&mut rng))
            .collect();
        assert!(ks_distance(&xs, &LimitLaw::StdNormal).unwrap() <= 0.0075);
    }

    #[test]
    fn ks_poisson_exact_atoms() {
        // samples placed on atoms in exact pmf proportions (up to rounding)
        let lambda = std::f64::consts::SQRT_2;
        let law = LimitLaw::poisson(lambda).unwrap();
        let mut xs = Vec::new();
        for (x, p) in law.atoms(1e-6) {
            let k = (p * 1e6).round() as usize;
            xs.extend(std::iter::repeat_n(x, k));
        }
        assert!(ks_distance(&xs, &law).unwrap() < 1e-5);
    }

    #[test]
    fn tv_point_mass() {
        let ln2 = std::f64::consts::LN_2;
        let tv = tv_distance_poisson(&[0; 100], ln2).unwrap();
        assert!((tv - 0.5).abs() < 1e-12);
        assert!(tv_distance_poisson(&[0, 1], 0.0).is_err());
        assert!(tv_distance_poisson(&[], 1.0).is_err());
    }

    #[test]
    fn tv_matching_proportions() {
        let mean = 0.5;
        let r = 1_000_000_000u64;
        let mut hist = BTreeMap::new();
        let mut assigned = 0;
        for k in 1..30u64 {
            let c = (special::poisson_pmf(k, mean) * r as f64).round() as u64;
            hist.insert(k, c);
            assigned += c;
        }
        hist.insert(0, r - assigned);
        assert!(tv_from_histogram(&hist, r, mean).unwrap() < 1e-6);
    }

    #[test]
    fn tv_sampled_poisson() {
        use rand_distr::{Distribution, Poisson};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pois = Poisson::new(0.5).unwrap();
        let counts: Vec<u64> = (0..100_000).map(|_| pois.sample(&mut rng) as u64).collect();
        assert!(tv_distance_poisson(&counts, 0.5).unwrap() <= 0.01);
    }

    #[test]
    fn grid_cdf_close_to_exact_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| LimitLaw::StdNormal.sample(&mut rng))
            .collect();
        let mut g = GridCdf::default();
        xs.iter().for_each(|&x| g.push(x));
        let exact = ks_distance(&xs, &LimitLaw::StdNormal).unwrap();
        let grid = g.ks(&LimitLaw::StdNormal);
        assert!(grid <= exact + 1e-12);
        assert!(exact - grid < 2e-3);
    }
}
