use serde::{Deserialize, Serialize};

use super::{sample_gff, worker_rng};
use crate::error::{Error, Result, ResourceCaps};
use crate::green::{equilibrium_potential, DirichletOperator};

/// Shape of the mean shift of the proposal field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tilt {
    /// `a` on every kept vertex.
    #[default]
    Constant,
    /// `a` times the equilibrium potential of the wall: equal shift on the
    /// wall, smallest energy cost.
    Equilibrium,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallEstimate {
    pub shift: f64,
    pub tilt: Tilt,
    pub samples: usize,
    /// Proposal draws that were nonnegative on the wall.
    pub hits: usize,
    pub p_hat: f64,
    pub log_p_hat: f64,
    pub stderr: f64,
    /// Delta-method error of `log_p_hat`.
    pub log_stderr: f64,
    /// Set when no proposal draw hit the wall event.
    pub no_hit: bool,
}

impl WallEstimate {
    /// Probability of the wall event under the proposal.
    pub fn proposal_rate(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }
}

/// Importance sampling of `P(phi >= 0 on wall)` with the field shifted by
/// `a * s` as proposal; the weight is `exp(-(Ls).phi + (Ls).s / 2)`.
pub fn estimate_wall_probability(
    op: &DirichletOperator,
    wall: &[usize],
    a: f64,
    tilt: Tilt,
    n_samples: usize,
    seed: u64,
    caps: &ResourceCaps,
) -> Result<WallEstimate> {
    if !(a >= 0.0) {
        return Err(Error::input("shift must be nonnegative"));
    }
    if n_samples < 2 {
        return Err(Error::input("need at least two samples"));
    }
    if wall.iter().any(|&w| w >= op.len()) {
        return Err(Error::input("wall vertex outside the keep set"));
    }
    let n = op.len();
    let s: Vec<f64> = match tilt {
        Tilt::Constant => vec![a; n],
        Tilt::Equilibrium if a == 0.0 => vec![0.0; n],
        Tilt::Equilibrium => {
            let eq = equilibrium_potential(op, wall, caps)?;
            eq.potential.iter().map(|v| a * v).collect()
        }
    };
    let ls = op.apply(&s);
    let half_sls = 0.5 * ls.iter().zip(&s).map(|(x, y)| x * y).sum::<f64>();
    let mut rng = worker_rng(seed, 0);
    let mut logw: Vec<f64> = Vec::new();
    for _ in 0..n_samples {
        let mut phi = sample_gff(op, &mut rng)?;
        for (p, si) in phi.iter_mut().zip(&s) {
            *p += si;
        }
        if wall.iter().all(|&w| phi[w] >= 0.0) {
            logw.push(half_sls - ls.iter().zip(&phi).map(|(x, y)| x * y).sum::<f64>());
        }
    }
    let hits = logw.len();
    if hits == 0 {
        return Ok(WallEstimate {
            shift: a,
            tilt,
            samples: n_samples,
            hits,
            p_hat: 0.0,
            log_p_hat: f64::NEG_INFINITY,
            stderr: 0.0,
            log_stderr: f64::INFINITY,
            no_hit: true,
        });
    }
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nf = n_samples as f64;
    let scaled: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / nf;
    let second = scaled.iter().map(|v| v * v).sum::<f64>() / nf;
    let var = (second - mean * mean).max(0.0) * nf / (nf - 1.0);
    let rel = (var / nf).sqrt() / mean;
    let log_p_hat = top + mean.ln();
    let p_hat = log_p_hat.exp();
    Ok(WallEstimate {
        shift: a,
        tilt,
        samples: n_samples,
        hits,
        p_hat,
        log_p_hat,
        stderr: p_hat * rel,
        log_stderr: rel,
        no_hit: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBound {
    /// `log q - (Ent + 1/e) / q`.
    pub log_lower: f64,
    /// Proposal probability `q` of the wall event.
    pub proposal_rate: f64,
    pub entropy: f64,
    pub stderr: f64,
}

/// Lower bound on `log P(wall)` from the entropy inequality, using the
/// proposal hit rate of `est` and the relative entropy of the shift.
pub fn entropy_lower_bound(est: &WallEstimate, entropy: f64) -> EntropyBound {
    let q = est.proposal_rate();
    let c = entropy + (-1.0f64).exp();
    if q == 0.0 {
        return EntropyBound { log_lower: f64::NEG_INFINITY, proposal_rate: 0.0, entropy, stderr: f64::INFINITY };
    }
    let se_q = (q * (1.0 - q) / est.samples as f64).sqrt();
    let slope = 1.0 / q + c / (q * q);
    EntropyBound { log_lower: q.ln() - c / q, proposal_rate: q, entropy, stderr: slope * se_q }
}
