use std::f64::consts::SQRT_2;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use super::stats::{summarize, ObservableStats};
use super::{edge_noise, sample_gff, worker_rng, FieldSample, Provenance};
use crate::error::{Error, Result, ResourceCaps};
use crate::green::DirichletOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    Lexicographic,
    /// Fresh permutation every sweep.
    #[default]
    RandomPermutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Sweeps discarded before recording.
    pub n_burnin: usize,
    /// Recorded states per chain.
    pub n_steps: usize,
    /// Sweeps between recorded states.
    pub thinning: usize,
    pub sweep_order: SweepOrder,
    pub seed: u64,
    pub chains: usize,
    /// Resample the field off the wall exactly every this many sweeps (0 = never).
    pub exterior_refresh: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_burnin: 200,
            n_steps: 1000,
            thinning: 1,
            sweep_order: SweepOrder::RandomPermutation,
            seed: 1,
            chains: 2,
            exterior_refresh: 0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || self.thinning == 0 || self.chains == 0 {
            return Err(Error::input("n_steps, thinning and chains must be positive"));
        }
        Ok(())
    }
}

/// Draw from `Normal(mean, sd^2)` conditioned to `[0, inf)`.
///
/// Inverse CDF on the complementary error function scale; far in the lower
/// tail (truncation point above 8 sd) exponential rejection instead.
pub fn truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    let a = -mean / sd;
    let z = if a > 8.0 {
        let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let z = a - u.ln() / lambda;
            let v: f64 = 1.0 - rng.random::<f64>();
            if v.ln() <= -0.5 * (z - lambda) * (z - lambda) {
                break z;
            }
        }
    } else {
        let q = 0.5 * erfc(a / SQRT_2);
        let t = (1.0 - rng.random::<f64>()) * q;
        SQRT_2 * erfc_inv(2.0 * t)
    };
    (mean + sd * z.max(a)).max(0.0)
}

/// Named vertex set (operator-local indices) whose mean is tracked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    pub name: String,
    pub vertices: Vec<usize>,
}

/// Single-site heat bath for the free field conditioned to be nonnegative on a wall.
pub struct GibbsChain<'a> {
    op: &'a DirichletOperator,
    wall: Vec<bool>,
    phi: Vec<f64>,
    rng: ChaCha8Rng,
    order: SweepOrder,
    perm: Vec<usize>,
    sweeps: u64,
    chain: u64,
    seed: u64,
    refresh_every: usize,
    exterior: Option<Exterior>,
}

struct Exterior {
    outside: Vec<usize>,
    wall: Vec<usize>,
    op: DirichletOperator,
}

impl<'a> GibbsChain<'a> {
    /// Starts from an exact unconstrained draw reflected to `|phi|` on the wall.
    pub fn new(
        op: &'a DirichletOperator,
        wall: &[usize],
        config: &ChainConfig,
        chain: u64,
        caps: &ResourceCaps,
    ) -> Result<Self> {
        config.validate()?;
        let n = op.len();
        let mut mask = vec![false; n];
        for &w in wall {
            if w >= n {
                return Err(Error::input("wall vertex outside the keep set"));
            }
            mask[w] = true;
        }
        let mut rng = worker_rng(config.seed, chain);
        let mut phi = sample_gff(op, &mut rng)?;
        for i in 0..n {
            if mask[i] {
                phi[i] = phi[i].abs();
            }
        }
        let exterior = if config.exterior_refresh > 0 && !wall.is_empty() && wall.len() < n {
            let outside: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
            let wall_list: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
            let sub = op.restrict(&outside, caps)?;
            Some(Exterior { outside, wall: wall_list, op: sub })
        } else {
            None
        };
        Ok(GibbsChain {
            op,
            wall: mask,
            phi,
            rng,
            order: config.sweep_order,
            perm: (0..n).collect(),
            sweeps: 0,
            chain,
            seed: config.seed,
            refresh_every: config.exterior_refresh,
            exterior,
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.phi
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn sweep(&mut self) -> Result<()> {
        let n = self.op.len();
        if self.order == SweepOrder::RandomPermutation {
            self.perm.shuffle(&mut self.rng);
        }
        let m = self.op.matrix();
        for k in 0..n {
            let x = match self.order {
                SweepOrder::Lexicographic => k,
                SweepOrder::RandomPermutation => self.perm[k],
            };
            let mut s = 0.0;
            let mut d = 0.0;
            for (j, v) in m.row(x) {
                if j == x {
                    d = v;
                } else {
                    s -= v * self.phi[j];
                }
            }
            let mean = s / d;
            let sd = 1.0 / d.sqrt();
            let val = if self.wall[x] {
                truncated_normal(mean, sd, &mut self.rng)
            } else {
                let z: f64 = self.rng.sample(StandardNormal);
                mean + sd * z
            };
            if !val.is_finite() {
                return Err(Error::Numeric(format!(
                    "chain {} produced {val} at vertex {x} after {} sweeps (mean {mean}, sd {sd})",
                    self.chain, self.sweeps
                )));
            }
            self.phi[x] = val;
        }
        self.sweeps += 1;
        if self.refresh_every > 0 && self.sweeps.is_multiple_of(self.refresh_every as u64) {
            self.refresh_exterior()?;
        }
        Ok(())
    }

    /// Exact draw of the field off the wall given its values on the wall.
    pub fn refresh_exterior(&mut self) -> Result<()> {
        let Some(ext) = &self.exterior else {
            return Ok(());
        };
        let wv: Vec<f64> = ext.wall.iter().map(|&w| self.phi[w]).collect();
        let coupling = self.op.matrix().block_mul(&ext.outside, &ext.wall, &wv);
        let mut b = edge_noise(&ext.op, &mut self.rng);
        for (bi, c) in b.iter_mut().zip(&coupling) {
            *bi -= c;
        }
        let v = ext.op.solve(&b)?;
        for (k, &i) in ext.outside.iter().enumerate() {
            self.phi[i] = v[k];
        }
        Ok(())
    }

    pub fn snapshot(&self) -> FieldSample {
        FieldSample {
            values: self.phi.clone(),
            provenance: Provenance::Gibbs { chain: self.chain, step: self.sweeps },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallRunStats {
    pub observables: Vec<ObservableStats>,
    pub chains: usize,
    pub recorded_per_chain: usize,
    /// Smallest wall value over all recorded states.
    pub min_wall_value: f64,
}

#[derive(Debug, Clone)]
pub struct WallRun {
    /// Recorded states, chain by chain, when requested.
    pub samples: Vec<FieldSample>,
    /// `traces[chain][observable][t]`.
    pub traces: Vec<Vec<Vec<f64>>>,
    /// Last state of each chain.
    pub finals: Vec<Vec<f64>>,
    pub stats: WallRunStats,
}

struct ChainOutput {
    samples: Vec<FieldSample>,
    traces: Vec<Vec<f64>>,
    last: Vec<f64>,
    min_wall: f64,
}

fn run_chain(
    op: &DirichletOperator,
    wall: &[usize],
    config: &ChainConfig,
    observables: &[Observable],
    keep_samples: bool,
    chain: u64,
    caps: &ResourceCaps,
) -> Result<ChainOutput> {
    let mut gc = GibbsChain::new(op, wall, config, chain, caps)?;
    for _ in 0..config.n_burnin {
        gc.sweep()?;
    }
    let mut traces = vec![Vec::with_capacity(config.n_steps); observables.len()];
    let mut samples = Vec::new();
    let mut min_wall = f64::INFINITY;
    for _ in 0..config.n_steps {
        for _ in 0..config.thinning {
            gc.sweep()?;
        }
        let phi = gc.state();
        for (t, o) in traces.iter_mut().zip(observables) {
            t.push(o.vertices.iter().map(|&i| phi[i]).sum::<f64>() / o.vertices.len() as f64);
        }
        for &w in wall {
            min_wall = min_wall.min(phi[w]);
        }
        if keep_samples {
            samples.push(gc.snapshot());
        }
    }
    Ok(ChainOutput { samples, traces, last: gc.state().to_vec(), min_wall })
}

/// Runs `config.chains` independent chains (in parallel unless `serial`) and
/// pools the observable traces. Results are ordered by chain id.
pub fn gibbs_hard_wall(
    op: &DirichletOperator,
    wall: &[usize],
    config: &ChainConfig,
    observables: &[Observable],
    keep_samples: bool,
    serial: bool,
    caps: &ResourceCaps,
) -> Result<WallRun> {
    config.validate()?;
    if let Some(o) = observables.iter().find(|o| o.vertices.is_empty() || o.vertices.iter().any(|&v| v >= op.len())) {
        return Err(Error::input(format!("observable {} has an empty or invalid vertex set", o.name)));
    }
    let ids: Vec<u64> = (0..config.chains as u64).collect();
    let outputs: Vec<ChainOutput> = if serial {
        ids.iter()
            .map(|&c| run_chain(op, wall, config, observables, keep_samples, c, caps))
            .collect::<Result<_>>()?
    } else {
        ids.par_iter()
            .map(|&c| run_chain(op, wall, config, observables, keep_samples, c, caps))
            .collect::<Result<_>>()?
    };
    let stats = WallRunStats {
        observables: observables
            .iter()
            .enumerate()
            .map(|(k, o)| {
                let per_chain: Vec<Vec<f64>> = outputs.iter().map(|c| c.traces[k].clone()).collect();
                summarize(&o.name, &per_chain)
            })
            .collect(),
        chains: config.chains,
        recorded_per_chain: config.n_steps,
        min_wall_value: outputs.iter().map(|c| c.min_wall).fold(f64::INFINITY, f64::min),
    };
    let mut samples = Vec::new();
    let mut traces = Vec::new();
    let mut finals = Vec::new();
    for c in outputs {
        samples.extend(c.samples);
        traces.push(c.traces);
        finals.push(c.last);
    }
    Ok(WallRun { samples, traces, finals, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_draws_are_nonnegative_with_right_mean() {
        let mut rng = worker_rng(1, 0);
        for &(m, s) in &[(0.0, 1.0), (-3.0, 1.0), (2.0, 0.5), (-20.0, 1.0), (-1e3, 1.0)] {
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| truncated_normal(m, s, &mut rng)).collect();
            assert!(xs.iter().all(|&x| x >= 0.0 && x.is_finite()));
            // closed form mean m + s * phi(a) / Q(a)
            let a: f64 = -m / s;
            let pdf = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let q = 0.5 * erfc(a / SQRT_2);
            let want = if a > 30.0 { m + s * (a + 1.0 / a - 2.0 / a.powi(3)) } else { m + s * pdf / q };
            let got = xs.iter().sum::<f64>() / n as f64;
            let sd = s.min(s / a.max(1.0));
            assert!((got - want).abs() < 5.0 * sd / (n as f64).sqrt() + 1e-9 * want.abs(), "{m} {s}: {got} vs {want}");
        }
    }
}
