//! Small statistical helpers for the audits and tests.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Total-variation distance between two distributions given as maps.
pub fn tv_distance<K: Ord + Clone>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let keys: BTreeSet<&K> = p.keys().chain(q.keys()).collect();
    keys.into_iter().map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs()).sum::<f64>() / 2.0
}

/// Normalizes counts into frequencies.
pub fn frequencies<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let total: u64 = counts.values().sum();
    counts.iter().map(|(k, &c)| (k.clone(), c as f64 / total as f64)).collect()
}

/// TV distance of empirical counts from the uniform distribution on
/// `support` (keys outside the support count fully against it).
pub fn tv_from_uniform<K: Ord + Clone>(counts: &BTreeMap<K, u64>, support: &[K]) -> f64 {
    let u = 1.0 / support.len() as f64;
    let uniform: BTreeMap<K, f64> = support.iter().map(|k| (k.clone(), u)).collect();
    tv_distance(&frequencies(counts), &uniform)
}

/// Pearson χ² statistic and p-value of `counts` against equal cell
/// probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let k = counts.len();
    if k < 2 || n == 0 {
        return (0.0, 1.0);
    }
    let e = n as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

/// Standard score of `successes` out of `n` trials against rate `p`.
pub fn binomial_z(successes: u64, n: u64, p: f64) -> f64 {
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    if sd == 0.0 {
        let expected = n as f64 * p;
        return if (successes as f64 - expected).abs() < 0.5 { 0.0 } else { f64::INFINITY };
    }
    (successes as f64 - n as f64 * p) / sd
}

/// Two-sided z threshold whose family-wise error over `tests` tests equals
/// the single-test error of a 3σ bound.
pub fn family_threshold(tests: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let single = 2.0 * (1.0 - normal.cdf(3.0));
    let per_test = 1.0 - (1.0 - single).powf(1.0 / tests.max(1) as f64);
    normal.inverse_cdf(1.0 - per_test / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let p = BTreeMap::from([("a", 0.5), ("b", 0.5)]);
        let q = BTreeMap::from([("a", 1.0)]);
        assert!((tv_distance(&p, &q) - 0.5).abs() < 1e-12);
        assert_eq!(tv_distance(&p, &p), 0.0);
        let c = BTreeMap::from([(0, 10u64), (1, 10)]);
        assert!(tv_from_uniform(&c, &[0, 1]) < 1e-12);
        assert!((tv_from_uniform(&c, &[0, 1, 2, 3]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chi_square_detects_skew() {
        let (_, p) = chi_square_uniform(&[250, 250, 250, 250]);
        assert!(p > 0.99);
        let (_, p) = chi_square_uniform(&[400, 200, 200, 200]);
        assert!(p < 1e-6);
    }

    #[test]
    fn z_scores_and_thresholds() {
        assert_eq!(binomial_z(50, 100, 0.5), 0.0);
        assert!((binomial_z(65, 100, 0.5) - 3.0).abs() < 1e-12);
        assert_eq!(binomial_z(0, 100, 0.0), 0.0);
        assert!(binomial_z(1, 100, 0.0).is_infinite());
        assert!((family_threshold(1) - 3.0).abs() < 1e-6);
        assert!(family_threshold(100) > 3.9);
    }
}
