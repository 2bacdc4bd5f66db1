//! Poisson-Binomial distribution: exact dynamic-programming CDF and the
//! skew-corrected normal approximation used on the production path.
//!
//! The exact convolution is quadratic in the number of parameters and serves
//! as the test oracle and as the fallback for small edges; large edges use
//! the refined approximation, which needs only the three accumulated moment
//! sums (mean, variance, third central moment).

use crate::special::{norm_cdf, norm_pdf, norm_quantile};
use crate::{Error, Result};

/// Refusal threshold for the exact oracle.
pub const ORACLE_CAP: usize = 2048;

/// Accumulated moment sums of a Poisson-Binomial parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PbMoments {
    /// Sum of p.
    pub mu: f64,
    /// Sum of p(1-p).
    pub var: f64,
    /// Sum of p(1-p)(1-2p): the third central moment.
    pub m3: f64,
}

impl PbMoments {
    pub fn accumulate(&mut self, p: f64) {
        let q = 1.0 - p;
        self.mu += p;
        self.var += p * q;
        self.m3 += p * q * (1.0 - 2.0 * p);
    }
}

pub fn moments(params: &[f64]) -> PbMoments {
    let mut m = PbMoments::default();
    for &p in params {
        m.accumulate(p);
    }
    m
}

/// Full probability mass function P(X = 0..n) by convolution.
pub fn exact_distribution(params: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; params.len() + 1];
    dist[0] = 1.0;
    for (i, &p) in params.iter().enumerate() {
        debug_assert!((0.0..=1.0).contains(&p), "parameter out of range: {p}");
        let q = 1.0 - p;
        for k in (0..=i).rev() {
            dist[k + 1] += dist[k] * p;
            dist[k] *= q;
        }
    }
    dist
}

/// Exact P(X <= k). Refuses parameter vectors larger than [`ORACLE_CAP`];
/// the production path never needs them exactly.
pub fn exact_cdf(params: &[f64], k: usize) -> Result<f64> {
    if params.len() > ORACLE_CAP {
        return Err(Error::config(format!(
            "exact Poisson-Binomial CDF limited to {ORACLE_CAP} parameters, got {}",
            params.len()
        )));
    }
    if let Some(p) = params.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::config(format!("parameter {p} outside [0, 1]")));
    }
    if k >= params.len() {
        return Ok(1.0);
    }
    let dist = exact_distribution(params);
    Ok(dist[..=k].iter().sum())
}

/// Refined normal approximation to P(X <= k), clamped to [0, 1].
///
/// With sigma = sqrt(var), skew = m3 / sigma^3 and x = (k + 0.5 - mu) / sigma
/// this evaluates Phi(x) + skew (1 - x^2) phi(x) / 6. A zero-variance vector
/// degenerates to the deterministic step at mu and is answered exactly.
pub fn rna_cdf(mu: f64, var: f64, m3: f64, k: u32) -> f64 {
    if var <= 0.0 {
        return if f64::from(k) + 1e-9 < mu { 0.0 } else { 1.0 };
    }
    let sigma = var.sqrt();
    let skew = m3 / (sigma * sigma * sigma);
    let x = (f64::from(k) + 0.5 - mu) / sigma;
    let value = norm_cdf(x) + skew * (1.0 - x * x) * norm_pdf(x) / 6.0;
    value.clamp(0.0, 1.0)
}

/// Smallest k with exact CDF(k) >= q.
pub fn percentile_exact(params: &[f64], q: f64) -> u32 {
    debug_assert!(q > 0.0 && q < 1.0);
    let dist = exact_distribution(params);
    let mut acc = 0.0;
    for (k, p) in dist.iter().enumerate() {
        acc += p;
        if acc >= q - 1e-12 {
            return k as u32;
        }
    }
    params.len() as u32
}

/// Smallest k with approximate CDF(k) >= q, for a vector of `n` parameters
/// summarized by its moment sums.
///
/// The search starts from the normal quantile guess ceil(mu + sigma z_q) and
/// scans locally; during the upward scan the CDF is forced non-decreasing by
/// a running max, since the skew polynomial can dip slightly in the tails.
pub fn percentile_rna(mu: f64, var: f64, m3: f64, n: u32, q: f64) -> u32 {
    debug_assert!(q > 0.0 && q < 1.0);
    if n == 0 {
        return 0;
    }
    if var <= 0.0 {
        // All parameters are 0 or 1: the sum is deterministic at mu.
        return (mu + 0.5).floor().min(f64::from(n)) as u32;
    }
    let sigma = var.sqrt();
    let guess = (mu + sigma * norm_quantile(q)).ceil();
    let mut k = guess.clamp(0.0, f64::from(n)) as u32;
    while k > 0 && rna_cdf(mu, var, m3, k - 1) >= q {
        k -= 1;
    }
    let mut running = rna_cdf(mu, var, m3, k);
    while k < n && running < q {
        k += 1;
        running = running.max(rna_cdf(mu, var, m3, k));
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Brute-force oracle: enumerate all 2^n outcomes.
    fn enumerate_cdf(params: &[f64], k: usize) -> f64 {
        let n = params.len();
        assert!(n <= 20);
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            let successes = mask.count_ones() as usize;
            if successes > k {
                continue;
            }
            let mut prob = 1.0;
            for (i, &p) in params.iter().enumerate() {
                prob *= if mask & (1 << i) != 0 { p } else { 1.0 - p };
            }
            total += prob;
        }
        total
    }

    #[test]
    fn fair_coin_pair_cdf() {
        assert!((exact_cdf(&[0.5, 0.5], 1).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn degenerate_all_ones() {
        let params = [1.0, 1.0, 1.0];
        assert_eq!(exact_cdf(&params, 2).unwrap(), 0.0);
        assert_eq!(exact_cdf(&params, 3).unwrap(), 1.0);
    }

    #[test]
    fn exact_matches_enumeration_on_random_vectors() {
        let mut rng = SplitMix64::new(0xFEED);
        for _ in 0..100 {
            let n = 1 + rng.next_below(12) as usize;
            let params: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let k = rng.next_below(n as u64 + 1) as usize;
            let dp = exact_cdf(&params, k).unwrap();
            let brute = enumerate_cdf(&params, k);
            assert!((dp - brute).abs() < 1e-10, "n={n} k={k}: {dp} vs {brute}");
        }
    }

    #[test]
    fn distribution_mass_sums_to_one() {
        let mut rng = SplitMix64::new(7);
        let params: Vec<f64> = (0..200).map(|_| rng.next_f64()).collect();
        let total: f64 = exact_distribution(&params).iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oracle_refuses_oversized_vectors() {
        let params = vec![0.1; ORACLE_CAP + 1];
        assert!(exact_cdf(&params, 5).is_err());
    }

    #[test]
    fn moment_sums_match_direct_formulas() {
        let params = [0.1, 0.7, 0.3];
        let m = moments(&params);
        assert!((m.mu - 1.1).abs() < 1e-12);
        let var: f64 = params.iter().map(|p| p * (1.0 - p)).sum();
        assert!((m.var - var).abs() < 1e-12);
    }

    #[test]
    fn moments_match_sampling() {
        // Empirical mean and variance of 1e5 samples within 3 standard errors.
        let params: Vec<f64> = vec![0.05, 0.2, 0.5, 0.8, 0.33, 0.6, 0.12];
        let m = moments(&params);
        let mut rng = SplitMix64::new(99);
        let n_samples = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_samples {
            let x = params
                .iter()
                .filter(|&&p| rng.next_f64() < p)
                .count() as f64;
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n_samples as f64;
        let var = sum_sq / n_samples as f64 - mean * mean;
        let se_mean = (m.var / n_samples as f64).sqrt();
        assert!((mean - m.mu).abs() < 3.0 * se_mean, "mean {mean} vs {}", m.mu);
        // Rough standard error for the variance of a bounded variable.
        let se_var = (2.0 * m.var * m.var / n_samples as f64).sqrt() + 0.01;
        assert!((var - m.var).abs() < 3.0 * se_var, "var {var} vs {}", m.var);
    }

    #[test]
    fn rna_close_to_exact_for_symmetric_binomial() {
        let params = vec![0.5; 100];
        let m = moments(&params);
        let exact = exact_cdf(&params, 49).unwrap();
        let rna = rna_cdf(m.mu, m.var, m.m3, 49);
        assert!((rna - exact).abs() < 1e-3, "{rna} vs {exact}");
    }

    #[test]
    fn rna_of_all_zero_params_is_a_step_at_zero() {
        assert_eq!(rna_cdf(0.0, 0.0, 0.0, 0), 1.0);
    }

    #[test]
    fn rna_tracks_exact_on_mixed_vectors() {
        let mut rng = SplitMix64::new(0xABCD);
        for _ in 0..50 {
            let n = 5 + rng.next_below(46) as usize;
            let params: Vec<f64> = (0..n).map(|_| rng.next_f64() * 0.9 + 0.05).collect();
            let m = moments(&params);
            if m.mu < 1.0 {
                continue;
            }
            for k in 0..=n {
                let exact = exact_cdf(&params, k).unwrap();
                let rna = rna_cdf(m.mu, m.var, m.m3, k as u32);
                assert!(
                    (rna - exact).abs() <= 1e-2,
                    "n={n} k={k}: rna {rna} vs exact {exact}"
                );
            }
        }
    }

    #[test]
    fn percentile_of_deterministic_sum() {
        let params = vec![1.0; 5];
        assert_eq!(percentile_exact(&params, 0.95), 5);
        let m = moments(&params);
        assert_eq!(percentile_rna(m.mu, m.var, m.m3, 5, 0.95), 5);
    }

    #[test]
    fn percentile_of_binomial_20_half() {
        // Binomial(20, 0.5): P(X<=13) = 0.9423, P(X<=14) = 0.9793.
        let params = vec![0.5; 20];
        assert_eq!(percentile_exact(&params, 0.95), 14);
    }

    #[test]
    fn percentile_of_empty_support_is_zero() {
        assert_eq!(percentile_exact(&[], 0.95), 0);
        assert_eq!(percentile_rna(0.0, 0.0, 0.0, 0, 0.95), 0);
    }

    #[test]
    fn percentile_is_monotone_in_q() {
        let mut rng = SplitMix64::new(31);
        let params: Vec<f64> = (0..40).map(|_| rng.next_f64()).collect();
        let m = moments(&params);
        let mut last_exact = 0;
        let mut last_rna = 0;
        for q in [0.05, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99] {
            let e = percentile_exact(&params, q);
            let r = percentile_rna(m.mu, m.var, m.m3, 40, q);
            assert!(e >= last_exact);
            assert!(r >= last_rna);
            last_exact = e;
            last_rna = r;
        }
    }

    #[test]
    fn percentile_is_monotone_under_parameter_increase() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..20 {
            let n = 3 + rng.next_below(30) as usize;
            let params: Vec<f64> = (0..n).map(|_| rng.next_f64() * 0.8).collect();
            let bumped: Vec<f64> = params.iter().map(|p| (p + 0.1).min(1.0)).collect();
            assert!(percentile_exact(&bumped, 0.95) >= percentile_exact(&params, 0.95));
        }
    }
}
