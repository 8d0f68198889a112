//! Two-sample Kolmogorov-Smirnov statistic, chi-square uniformity tests and
//! the small estimators the experiment reports are built from.

use crate::special::chi_square_pvalue;

/// Two-sample KS statistic sup_x |F(x) - G(x)|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Chi-square p-value for observed bin counts against expected probabilities.
pub fn chi_square_test(observed: &[u64], expected_probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (o, p) in observed.iter().zip(expected_probs) {
        let e = total as f64 * p;
        stat += (*o as f64 - e) * (*o as f64 - e) / e;
    }
    chi_square_pvalue(stat, observed.len() - 1)
}

/// Two-sample chi-square homogeneity p-value on shared bins.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for (x, y) in a.iter().zip(b) {
        let t = x + y;
        if t == 0 {
            continue;
        }
        let ea = t as f64 * na as f64 / (na + nb) as f64;
        let eb = t as f64 * nb as f64 / (na + nb) as f64;
        stat += (*x as f64 - ea).powi(2) / ea + (*y as f64 - eb).powi(2) / eb;
        dof += 1;
    }
    chi_square_pvalue(stat, dof.saturating_sub(1).max(1))
}

/// Binomial standard error sqrt(p(1-p)/n) of an observed frequency.
pub fn binomial_stderr(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Median (average of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn ks_identical_samples_is_zero() {
        let a = [0.1, 0.5, 0.9];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn ks_disjoint_samples_is_one() {
        let a = [0.0, 0.1];
        let b = [0.8, 0.9];
        assert!((ks_two_sample(&a, &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_handles_ties_across_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample(&a, &b), 0.0);
    }

    #[test]
    fn ks_same_distribution_is_small() {
        let mut r = RngStream::new(10, 0);
        let a: Vec<f64> = (0..4000).map(|_| r.uniform()).collect();
        let b: Vec<f64> = (0..4000).map(|_| r.uniform()).collect();
        let d = ks_two_sample(&a, &b);
        assert!(d < 0.05, "d = {d}");
    }

    #[test]
    fn chi_square_uniform_counts() {
        let mut r = RngStream::new(11, 0);
        let mut counts = [0u64; 8];
        for _ in 0..80_000 {
            counts[r.index_below(8)] += 1;
        }
        let p = chi_square_test(&counts, &[1.0 / 8.0; 8]);
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn binomial_stderr_edges() {
        assert_eq!(binomial_stderr(0, 100), 0.0);
        assert_eq!(binomial_stderr(100, 100), 0.0);
        assert!((binomial_stderr(50, 100) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
