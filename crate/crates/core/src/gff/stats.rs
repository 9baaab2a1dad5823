//! Monte Carlo error bars.

use serde::Serialize;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance; 0 below two values.
pub fn variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

/// Integrated autocorrelation time by Geyer's initial positive sequence.
pub fn integrated_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 1.0;
    }
    let m = mean(x);
    let gamma = |k: usize| -> f64 {
        (0..n - k).map(|i| (x[i] - m) * (x[i + k] - m)).sum::<f64>() / n as f64
    };
    let g0 = gamma(0);
    if g0 <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = gamma(2 * k) + gamma(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    ((2.0 * sum - g0) / g0).max(1.0)
}

/// Standard error of the mean of a correlated series.
pub fn autocorrelated_stderr(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    let g0 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    (g0 * integrated_autocorrelation(x) / n as f64).sqrt()
}

/// Potential scale reduction over equal-length chains.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Option<f64> {
    let m = chains.len();
    if m < 2 {
        return None;
    }
    let n = chains.iter().map(|c| c.len()).min()?;
    if n < 2 {
        return None;
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let w = chains.iter().map(|c| variance(&c[..n])).sum::<f64>() / m as f64;
    let b = n as f64 * variance(&means);
    if w <= 0.0 {
        return if b <= 0.0 { Some(1.0) } else { None };
    }
    let v = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    Some((v / w).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableStats {
    pub name: String,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    /// Potential scale reduction, present with at least two chains.
    pub r_hat: Option<f64>,
    pub samples: usize,
}

/// Pools equal-weight chains: the mean over all draws, the error bar from the
/// per-chain autocorrelated errors.
pub fn summarize(name: &str, chains: &[Vec<f64>]) -> ObservableStats {
    let all: Vec<f64> = chains.iter().flatten().copied().collect();
    let k = chains.len().max(1) as f64;
    let se2: f64 = chains.iter().map(|c| autocorrelated_stderr(c).powi(2)).sum::<f64>() / (k * k);
    ObservableStats {
        name: name.to_string(),
        mean: if all.is_empty() { f64::NAN } else { mean(&all) },
        variance: variance(&all),
        stderr: se2.sqrt(),
        r_hat: gelman_rubin(chains),
        samples: all.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_tau_near_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let tau = integrated_autocorrelation(&x);
        assert!((tau - 1.0).abs() < 0.15, "{tau}");
    }

    #[test]
    fn ar1_tau() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho: f64 = 0.8;
        let mut x = vec![0.0f64; 100_000];
        for i in 1..x.len() {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[i] = rho * x[i - 1] + z;
        }
        let want = (1.0 + rho) / (1.0 - rho);
        let tau = integrated_autocorrelation(&x);
        assert!((tau / want - 1.0).abs() < 0.15, "{tau} vs {want}");
    }

    #[test]
    fn identical_chains_have_unit_r_hat() {
        let c = vec![1.0, 2.0, 3.0, 2.0];
        let r = gelman_rubin(&[c.clone(), c]).unwrap();
        assert!((r - (0.75f64).sqrt()).abs() < 1e-12);
        assert!(gelman_rubin(&[vec![0.0, 0.1], vec![5.0, 5.1]]).unwrap() > 5.0);
    }
}
