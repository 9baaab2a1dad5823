use crate::error::{Error, Result};

/// Mean of `phi` over `set`.
pub fn local_mean(phi: &[f64], set: &[usize]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::input("empty vertex set"));
    }
    Ok(set.iter().map(|&i| phi[i]).sum::<f64>() / set.len() as f64)
}

/// Mean over each block.
pub fn block_means(phi: &[f64], blocks: &[Vec<usize>]) -> Result<Vec<f64>> {
    blocks.iter().map(|b| local_mean(phi, b)).collect()
}

/// Fraction of `set` with `phi <= t`, per threshold.
pub fn empirical_cdf(phi: &[f64], set: &[usize], thresholds: &[f64]) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::input("empty vertex set"));
    }
    Ok(thresholds
        .iter()
        .map(|&t| set.iter().filter(|&&i| phi[i] <= t).count() as f64 / set.len() as f64)
        .collect())
}

/// Number of `points` with `values <= threshold`.
pub fn theta_count(values: &[f64], points: &[usize], threshold: f64) -> usize {
    points.iter().filter(|&&i| values[i] <= threshold).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field() {
        let phi = vec![2.0; 10];
        let all: Vec<usize> = (0..10).collect();
        assert_eq!(local_mean(&phi, &all).unwrap(), 2.0);
        assert_eq!(empirical_cdf(&phi, &all, &[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 1.0, 1.0]);
        assert_eq!(theta_count(&phi, &all, 2.0), 10);
        assert!(local_mean(&phi, &[]).is_err());
    }

    #[test]
    fn block_weighted_average_is_global_mean() {
        let phi: Vec<f64> = (0..9).map(|i| (i * i) as f64 * 0.37).collect();
        let blocks = vec![vec![0, 1, 2, 3], vec![4], vec![5, 6, 7, 8]];
        let bm = block_means(&phi, &blocks).unwrap();
        let weighted: f64 = bm.iter().zip(&blocks).map(|(m, b)| m * b.len() as f64).sum::<f64>() / 9.0;
        let all: Vec<usize> = (0..9).collect();
        assert!((weighted - local_mean(&phi, &all).unwrap()).abs() < 1e-12);
    }
}
