//! Small statistics helpers for the verification suites.

/// One-sample Kolmogorov-Smirnov statistic against the unit exponential.
pub fn ks_statistic_exp1(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-x).exp();
        d = d
            .max(cdf - i as f64 / n)
            .max((i + 1) as f64 / n - cdf);
    }
    d
}

/// Asymptotic Kolmogorov critical values via Stephens' scaling
/// `D * (sqrt(n) + 0.12 + 0.11/sqrt(n))`.
#[derive(Debug, Clone, Copy)]
pub enum KsLevel {
    P05,
    P01,
}

impl KsLevel {
    fn k_alpha(self) -> f64 {
        match self {
            KsLevel::P05 => 1.358,
            KsLevel::P01 => 1.628,
        }
    }
}

pub struct KsOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn ks_test_exp1(samples: &[f64], level: KsLevel) -> KsOutcome {
    let d = ks_statistic_exp1(samples);
    let sqrt_n = (samples.len() as f64).sqrt();
    let threshold = level.k_alpha() / (sqrt_n + 0.12 + 0.11 / sqrt_n);
    KsOutcome {
        statistic: d,
        threshold,
        pass: d < threshold,
    }
}

/// Whether an empirical frequency sits within `n_se` standard errors of `p`.
pub fn within_se(count: u64, total: u64, p: f64, n_se: f64) -> bool {
    let n = total as f64;
    let se = (p * (1.0 - p) / n).sqrt();
    ((count as f64 / n) - p).abs() <= n_se * se
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp_samples(n: usize, rate: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln() / rate)
            .collect()
    }

    #[test]
    fn unit_exponential_passes() {
        let outcome = ks_test_exp1(&exp_samples(10_000, 1.0, 5), KsLevel::P01);
        assert!(outcome.pass, "D = {}", outcome.statistic);
    }

    #[test]
    fn wrong_rate_fails() {
        let outcome = ks_test_exp1(&exp_samples(10_000, 1.15, 5), KsLevel::P01);
        assert!(!outcome.pass, "D = {}", outcome.statistic);
    }

    #[test]
    fn se_band() {
        assert!(within_se(500, 1000, 0.5, 3.0));
        assert!(!within_se(600, 1000, 0.5, 3.0));
    }
}
