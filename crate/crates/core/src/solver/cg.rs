use super::sparse::SymCsr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi preconditioned conjugate gradients from a zero start.
pub fn conjugate_gradient(
    a: &SymCsr,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let dinv: Vec<f64> = a
        .diag()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonTransient(format!(
                "conjugate gradients met curvature {pap:e}; matrix is not positive definite"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / bnorm;
        if res <= tol {
            return Ok((x, CgStats { iterations: it, relative_residual: res }));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numeric(format!(
        "conjugate gradients did not reach {tol:e} in {max_iter} iterations"
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_solution() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i as u32, i as u32, 2.5));
            if i + 1 < n {
                t.push((i as u32, i as u32 + 1, -1.0));
                t.push((i as u32 + 1, i as u32, -1.0));
            }
        }
        let a = SymCsr::from_triplets(n, t);
        let b = vec![1.0; n];
        let (x, stats) = conjugate_gradient(&a, &b, 1e-13, 1000).unwrap();
        assert!(stats.relative_residual <= 1e-13);
        let r = a.mul(&x);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-11));
    }

    #[test]
    fn reports_non_convergence() {
        let a = SymCsr::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 1e-8), (0, 1, 0.0), (1, 0, 0.0)]);
        assert!(conjugate_gradient(&a, &[1.0, 1.0], 1e-14, 0).is_err());
    }
}
