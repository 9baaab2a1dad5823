//! Exact free field samples, conditional decomposition, hard-wall Gibbs chains,
//! tilted wall probabilities and field observables.

mod conditional;
mod gibbs;
mod observables;
pub mod stats;
mod wall;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result, ResourceCaps};
use crate::green::{quad_form_inverse_green, DirichletOperator};

pub use conditional::{conditional_decompose, ConditioningGrid, Decomposition};
pub use gibbs::{
    gibbs_hard_wall, truncated_normal, ChainConfig, GibbsChain, Observable, SweepOrder, WallRun,
    WallRunStats,
};
pub use observables::{block_means, empirical_cdf, local_mean, theta_count};
pub use wall::{
    entropy_lower_bound, estimate_wall_probability, EntropyBound, Tilt, WallEstimate,
};

/// RNG for one worker: the master seed selects the key, the worker id the stream.
pub fn worker_rng(seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact { index: u64 },
    Gibbs { chain: u64, step: u64 },
}

/// Field values on the kept vertices (operator-local order).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub seed: u64,
}

/// `B^T xi`: one standard normal per kept edge, weighted by the square root of
/// its conductance, plus one per vertex for the killing. Covariance is `L`.
pub(crate) fn edge_noise<R: Rng + ?Sized>(op: &DirichletOperator, rng: &mut R) -> Vec<f64> {
    let n = op.len();
    let m = op.matrix();
    let mut b = vec![0.0; n];
    for i in 0..n {
        for (j, v) in m.row(i) {
            if j > i && v < 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                let s = (-v).sqrt() * z;
                b[i] += s;
                b[j] -= s;
            }
        }
        let k = op.kill()[i];
        if k > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            b[i] += k.sqrt() * z;
        }
    }
    b
}

/// One exact draw with covariance `L^{-1}`: through the factor when present,
/// otherwise by solving against edge noise.
pub fn sample_gff<R: Rng + ?Sized>(op: &DirichletOperator, rng: &mut R) -> Result<Vec<f64>> {
    match op.factor() {
        Some(f) => Ok(f.sample(rng)),
        None => op.solve(&edge_noise(op, rng)),
    }
}

/// `count` exact draws from one seeded stream.
pub fn sample_gff_batch(op: &DirichletOperator, count: usize, seed: u64) -> Result<Vec<FieldSample>> {
    let mut rng = worker_rng(seed, 0);
    (0..count)
        .map(|i| {
            Ok(FieldSample {
                values: sample_gff(op, &mut rng)?,
                provenance: Provenance::Exact { index: i as u64 },
                seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub x: usize,
    pub y: usize,
    pub estimate: f64,
    /// Jackknife standard error.
    pub stderr: f64,
}

/// Unbiased covariance of `values[.][x]` and `values[.][y]` per pair, with
/// leave-one-out jackknife errors.
pub fn empirical_covariance(samples: &[Vec<f64>], pairs: &[(usize, usize)]) -> Result<Vec<CovarianceEstimate>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::input("covariance needs at least three samples"));
    }
    let nf = n as f64;
    pairs
        .iter()
        .map(|&(x, y)| {
            let a: Vec<f64> = samples.iter().map(|s| s[x]).collect();
            let b: Vec<f64> = samples.iter().map(|s| s[y]).collect();
            // centre first for accuracy; covariance is shift invariant
            let (ma, mb) = (stats::mean(&a), stats::mean(&b));
            let a: Vec<f64> = a.iter().map(|v| v - ma).collect();
            let b: Vec<f64> = b.iter().map(|v| v - mb).collect();
            let sa: f64 = a.iter().sum();
            let sb: f64 = b.iter().sum();
            let sab: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
            let estimate = (sab - sa * sb / nf) / (nf - 1.0);
            let loo: Vec<f64> = (0..n)
                .map(|i| {
                    let (ra, rb) = (sa - a[i], sb - b[i]);
                    (sab - a[i] * b[i] - ra * rb / (nf - 1.0)) / (nf - 2.0)
                })
                .collect();
            let lm = stats::mean(&loo);
            let var = (nf - 1.0) / nf * loo.iter().map(|v| (v - lm) * (v - lm)).sum::<f64>();
            Ok(CovarianceEstimate { x, y, estimate, stderr: var.sqrt() })
        })
        .collect()
}

/// `1/2 a^2 <1_S, (G_S)^{-1} 1_S>`: the divergence between the field shifted
/// by `a` on `subset` and the unshifted field, restricted to `subset`.
pub fn relative_entropy(op: &DirichletOperator, subset: &[usize], a: f64, caps: &ResourceCaps) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let ones = vec![1.0; subset.len()];
    Ok(0.5 * a * a * quad_form_inverse_green(op, subset, &ones, caps)?)
}
