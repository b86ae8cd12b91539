//! Replication statistics.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% critical value for the mean of `n` normally distributed
/// values with unknown variance: the Student-t quantile with `n − 1` degrees
/// of freedom (2.776 for five replications, tending to 1.96).
pub fn critical_value_95(n: usize) -> f64 {
    assert!(n >= 2, "a confidence interval needs at least two values");
    StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Sample mean and 95% CI half-width `t·s/√n`.
pub fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, critical_value_95(n) * (var / n as f64).sqrt())
}

/// Uniform reservoir sample (Algorithm R) of at most `cap` items, taken in
/// iteration order.
pub fn reservoir<R: Rng, I: IntoIterator<Item = f64>>(items: I, cap: usize, rng: &mut R) -> Vec<f64> {
    let mut kept = Vec::new();
    for (seen, x) in items.into_iter().enumerate() {
        if kept.len() < cap {
            kept.push(x);
        } else {
            let j = rng.random_range(0..=seen);
            if j < cap {
                kept[j] = x;
            }
        }
    }
    kept
}

/// Kolmogorov–Smirnov distance between sorted samples and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Fraction of sorted samples that are `<= t`.
pub fn empirical_cdf(sorted: &[f64], t: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.partition_point(|&x| x <= t) as f64 / sorted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ci_of_known_values() {
        let (m, h) = mean_and_ci(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(m, 3.0);
        // s = sqrt(2.5), t(0.975, 4) = 2.7764451
        assert!((h - 2.776_445_105 * (2.5f64 / 5.0).sqrt()).abs() < 1e-8);
        assert_eq!(mean_and_ci(&[2.0, 2.0]).1, 0.0);
    }

    #[test]
    fn critical_values() {
        assert!((critical_value_95(5) - 2.776_445_105).abs() < 1e-8);
        assert!((critical_value_95(2) - 12.706_204_736).abs() < 1e-7);
        assert!((critical_value_95(100_000) - 1.96).abs() < 1e-3);
    }

    #[test]
    fn reservoir_keeps_everything_under_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = reservoir((0..10).map(f64::from), 20, &mut rng);
        assert_eq!(v.len(), 10);
        let v = reservoir((0..1000).map(f64::from), 100, &mut rng);
        assert_eq!(v.len(), 100);
        // Roughly uniform: the mean of a uniform subsample of 0..1000.
        let m = v.iter().sum::<f64>() / 100.0;
        assert!((m - 499.5).abs() < 100.0, "{m}");
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&xs, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn empirical_cdf_counts_ties() {
        let xs = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(empirical_cdf(&xs, 2.0), 0.75);
        assert_eq!(empirical_cdf(&xs, 0.5), 0.0);
    }
}
