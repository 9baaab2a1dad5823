use rand::Rng;
use rand_distr::StandardNormal;

use super::ordering::nested_dissection;
use super::sparse::SymCsr;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Permuted upper triangle by columns plus the elimination tree and column counts.
#[derive(Debug, Clone)]
pub struct SymbolicCholesky {
    n: usize,
    perm: Vec<usize>,
    cp: Vec<usize>,
    ci: Vec<u32>,
    cx: Vec<f64>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

impl SymbolicCholesky {
    /// Orders by nested dissection on `coords` (`dim` per vertex) and counts the fill.
    pub fn analyze(a: &SymCsr, coords: &[i64], dim: usize) -> Self {
        let n = a.n();
        let perm = if coords.len() == n * dim && dim > 0 {
            nested_dissection(coords, dim)
        } else {
            (0..n).collect()
        };
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        let mut cp = Vec::with_capacity(n + 1);
        cp.push(0);
        let mut ci = Vec::new();
        let mut cx = Vec::new();
        let mut col: Vec<(u32, f64)> = Vec::new();
        for k in 0..n {
            col.clear();
            for (j, v) in a.row(perm[k]) {
                let i = pinv[j];
                if i <= k {
                    col.push((i as u32, v));
                }
            }
            col.sort_unstable_by_key(|e| e.0);
            for &(i, v) in &col {
                ci.push(i);
                cx.push(v);
            }
            cp.push(ci.len());
        }
        // elimination tree
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for p in cp[k]..cp[k + 1] {
                let mut i = ci[p] as usize;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }
        // column counts from the row patterns
        let mut counts = vec![1usize; n];
        let mut s = vec![0usize; n];
        let mut w = vec![NONE; n];
        for k in 0..n {
            let top = ereach(&cp, &ci, k, &parent, &mut s, &mut w);
            for &j in &s[top..n] {
                counts[j] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + counts[k];
        }
        SymbolicCholesky { n, perm, cp, ci, cx, parent, lp }
    }

    /// Nonzeros of the factor, diagonal included.
    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    pub fn factorize(self) -> Result<CholeskyFactor> {
        let n = self.n;
        let nnz = self.lp[n];
        let mut li = vec![0u32; nnz];
        let mut lx = vec![0.0f64; nnz];
        let mut c: Vec<usize> = self.lp[..n].to_vec();
        let mut x = vec![0.0f64; n];
        let mut s = vec![0usize; n];
        let mut w = vec![NONE; n];
        for k in 0..n {
            let top = ereach(&self.cp, &self.ci, k, &self.parent, &mut s, &mut w);
            x[k] = 0.0;
            for p in self.cp[k]..self.cp[k + 1] {
                x[self.ci[p] as usize] = self.cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for t in top..n {
                let i = s[t];
                let lki = x[i] / lx[self.lp[i]];
                x[i] = 0.0;
                for q in self.lp[i] + 1..c[i] {
                    x[li[q] as usize] -= lx[q] * lki;
                }
                d -= lki * lki;
                let q = c[i];
                c[i] += 1;
                li[q] = k as u32;
                lx[q] = lki;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NonTransient(format!(
                    "pivot {k} of {n} is {d:e}; matrix is not positive definite"
                )));
            }
            let q = c[k];
            c[k] += 1;
            li[q] = k as u32;
            lx[q] = d.sqrt();
        }
        Ok(CholeskyFactor { n, perm: self.perm, lp: self.lp, li, lx })
    }
}

/// Pattern of row `k` of L in topological order, returned as `s[top..n]`.
fn ereach(
    cp: &[usize],
    ci: &[u32],
    k: usize,
    parent: &[usize],
    s: &mut [usize],
    w: &mut [usize],
) -> usize {
    let n = s.len();
    let mut top = n;
    w[k] = k;
    for p in cp[k]..cp[k + 1] {
        let mut i = ci[p] as usize;
        if i > k {
            continue;
        }
        let mut len = 0;
        while w[i] != k {
            s[len] = i;
            len += 1;
            w[i] = k;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            s[top] = s[len];
        }
    }
    top
}

/// `P A P^T = L L^T` with L stored by columns, diagonal first.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(a: &SymCsr, coords: &[i64], dim: usize) -> Result<Self> {
        SymbolicCholesky::analyze(a, coords, dim).factorize()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.lp[self.n]
    }

    fn lower_solve(&self, y: &mut [f64]) {
        for j in 0..self.n {
            let p0 = self.lp[j];
            y[j] /= self.lx[p0];
            let yj = y[j];
            for p in p0 + 1..self.lp[j + 1] {
                y[self.li[p] as usize] -= self.lx[p] * yj;
            }
        }
    }

    fn upper_solve(&self, y: &mut [f64]) {
        for j in (0..self.n).rev() {
            let p0 = self.lp[j];
            let mut s = y[j];
            for p in p0 + 1..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p] as usize];
            }
            y[j] = s / self.lx[p0];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.lower_solve(&mut y);
        self.upper_solve(&mut y);
        let mut x = vec![0.0; self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    /// `P^T L^{-T} z` for standard normal `z`: covariance `A^{-1}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        self.upper_solve(&mut z);
        let mut x = vec![0.0; self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|j| 2.0 * self.lx[self.lp[j]].ln()).sum()
    }
}
