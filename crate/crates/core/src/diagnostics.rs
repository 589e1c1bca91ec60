//! Goodness-of-fit statistics used to check samplers against exact laws.

use statrs::distribution::{ChiSquared, ContinuousCDF};

fn sort(xs: &mut [f64]) {
    xs.sort_by(|a, b| a.total_cmp(b));
}

/// Asymptotic Kolmogorov critical coefficient `sqrt(-ln(α/2) / 2)`.
fn kolmogorov_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n(x) - F(x)|`.
/// Sorts `xs` in place.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    sort(xs);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

pub fn ks_critical_one_sample(n: usize, alpha: f64) -> f64 {
    kolmogorov_coefficient(alpha) / (n as f64).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic. Sorts both inputs in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    sort(a);
    sort(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn ks_critical_two_sample(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    kolmogorov_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// Merges adjacent cells (left to right) until each has expected count >= 5.
fn pool_cells(observed: &[Vec<u64>], expected: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rows = observed.len();
    let mut obs: Vec<Vec<f64>> = vec![Vec::new(); rows];
    let mut exp = Vec::new();
    let mut acc_o = vec![0.0; rows];
    let mut acc_e = 0.0;
    for (k, &e) in expected.iter().enumerate() {
        for r in 0..rows {
            acc_o[r] += observed[r][k] as f64;
        }
        acc_e += e;
        if acc_e >= 5.0 {
            for r in 0..rows {
                obs[r].push(acc_o[r]);
                acc_o[r] = 0.0;
            }
            exp.push(acc_e);
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o.iter().any(|&o| o > 0.0) {
        if let Some(last) = exp.last_mut() {
            *last += acc_e;
            for r in 0..rows {
                *obs[r].last_mut().unwrap() += acc_o[r];
            }
        } else {
            exp.push(acc_e);
            for r in 0..rows {
                obs[r].push(acc_o[r]);
            }
        }
    }
    (obs, exp)
}

/// Pearson χ² statistic and degrees of freedom for observed counts against
/// cell probabilities (probabilities should sum to one).
pub fn chi_square_statistic(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    let (obs, exp) = pool_cells(&[counts.to_vec()], &expected);
    let stat = obs[0]
        .iter()
        .zip(&exp)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    (stat, exp.len().saturating_sub(1))
}

pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df.max(1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// `true` when the goodness-of-fit test does not reject at level `alpha`.
pub fn chi_square_test(counts: &[u64], probs: &[f64], alpha: f64) -> bool {
    let (stat, df) = chi_square_statistic(counts, probs);
    stat < chi_square_critical(df, alpha)
}

/// χ² test of homogeneity between two count vectors over the same cells.
/// Returns the statistic, degrees of freedom and whether it passes at `alpha`.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64], alpha: f64) -> (f64, usize, bool) {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let pooled: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x + y) as f64 * na.min(nb) / total)
        .collect();
    let (obs, _) = pool_cells(&[a.to_vec(), b.to_vec()], &pooled);
    let mut stat = 0.0;
    for k in 0..obs[0].len() {
        let col = obs[0][k] + obs[1][k];
        for (r, n) in [(0, na), (1, nb)] {
            let e = col * n / total;
            if e > 0.0 {
                stat += (obs[r][k] - e) * (obs[r][k] - e) / e;
            }
        }
    }
    let df = obs[0].len().saturating_sub(1);
    (stat, df, stat < chi_square_critical(df, alpha))
}

/// Mean and unbiased sample standard deviation.
pub fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
