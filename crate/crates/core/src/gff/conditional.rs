use serde::Serialize;

use crate::error::{Error, Result, ResourceCaps};
use crate::green::DirichletOperator;

/// Conditioning on the field along a grid `D`: the operator of the walk killed
/// on `D`, plus the per-rip variances.
#[derive(Debug, Clone)]
pub struct ConditioningGrid {
    grid: Vec<usize>,
    rest: Vec<usize>,
    rips: Vec<usize>,
    inner: DirichletOperator,
    variances: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// Conditional mean given the grid values; equals the field on the grid.
    pub mu: Vec<f64>,
    /// `phi - mu`, zero on the grid.
    pub residual: Vec<f64>,
    pub rip_mean: Vec<f64>,
    /// `G_{K \ D}(x, x)` at every rip point.
    pub rip_variance: Vec<f64>,
}

impl ConditioningGrid {
    /// `grid` and `rips` are operator-local indices. Fails with a structural
    /// error when a component of the complement holds two rip points.
    pub fn new(op: &DirichletOperator, grid: &[usize], rips: &[usize], caps: &ResourceCaps) -> Result<Self> {
        let n = op.len();
        let mut on_grid = vec![false; n];
        for &g in grid {
            if g >= n {
                return Err(Error::input("grid index out of range"));
            }
            on_grid[g] = true;
        }
        for &r in rips {
            if r >= n || on_grid[r] {
                return Err(Error::Structural("rip point missing or on the grid".into()));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|&i| !on_grid[i]).collect();
        if rest.is_empty() {
            return Err(Error::input("grid covers the whole keep set"));
        }
        // components of the complement
        let m = op.matrix();
        let mut comp = vec![usize::MAX; n];
        let mut stack = Vec::new();
        for &s in &rest {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = s;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for (u, a) in m.row(v) {
                    if a != 0.0 && !on_grid[u] && comp[u] == usize::MAX {
                        comp[u] = s;
                        stack.push(u);
                    }
                }
            }
        }
        let mut owner = std::collections::HashMap::new();
        for &r in rips {
            if let Some(prev) = owner.insert(comp[r], r) {
                return Err(Error::Structural(format!(
                    "grid does not separate rip points {prev} and {r}"
                )));
            }
        }
        let inner = op.restrict(&rest, caps)?;
        let variances = rips
            .iter()
            .map(|&r| {
                let l = rest.binary_search(&r).unwrap();
                inner.green_column(l).map(|c| c[l])
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut grid = grid.to_vec();
        grid.sort_unstable();
        grid.dedup();
        Ok(ConditioningGrid { grid, rest, rips: rips.to_vec(), inner, variances })
    }

    pub fn rip_variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn decompose(&self, op: &DirichletOperator, phi: &[f64]) -> Result<Decomposition> {
        if phi.len() != op.len() {
            return Err(Error::input("sample length does not match the operator"));
        }
        let gvals: Vec<f64> = self.grid.iter().map(|&g| phi[g]).collect();
        let rhs: Vec<f64> =
            op.matrix().block_mul(&self.rest, &self.grid, &gvals).iter().map(|v| -v).collect();
        let u = self.inner.solve(&rhs)?;
        let mut mu = phi.to_vec();
        for (k, &i) in self.rest.iter().enumerate() {
            mu[i] = u[k];
        }
        let residual: Vec<f64> = phi.iter().zip(&mu).map(|(a, b)| a - b).collect();
        Ok(Decomposition {
            rip_mean: self.rips.iter().map(|&r| mu[r]).collect(),
            rip_variance: self.variances.clone(),
            mu,
            residual,
        })
    }
}

/// One-shot form of `ConditioningGrid::new` followed by `decompose`.
pub fn conditional_decompose(
    op: &DirichletOperator,
    grid: &[usize],
    rips: &[usize],
    phi: &[f64],
    caps: &ResourceCaps,
) -> Result<Decomposition> {
    ConditioningGrid::new(op, grid, rips, caps)?.decompose(op, phi)
}
