#![allow(dead_code)]

use gsc_core::solver::SymCsr;
use gsc_core::{DirichletOperator, ResourceCaps, SolverConfig};

/// Operator `diag - A` of a small graph; every diagonal must dominate its degree.
pub fn graph_op(n: usize, edges: &[(usize, usize)], diag: &[f64]) -> DirichletOperator {
    let mut t = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        t.push((i as u32, i as u32, d));
    }
    for &(a, b) in edges {
        t.push((a as u32, b as u32, -1.0));
        t.push((b as u32, a as u32, -1.0));
    }
    let coords: Vec<i64> = (0..n as i64).flat_map(|i| [i, 0]).collect();
    DirichletOperator::from_matrix(SymCsr::from_triplets(n, t), coords, 2, SolverConfig::default(), &ResourceCaps::default())
        .expect("fixture operator")
}

pub fn path_op(n: usize, diag: f64) -> DirichletOperator {
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    graph_op(n, &edges, &vec![diag; n])
}

pub fn cycle_op(n: usize, diag: f64) -> DirichletOperator {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph_op(n, &edges, &vec![diag; n])
}

/// Dense inverse of the operator matrix.
pub fn dense_green(op: &DirichletOperator) -> nalgebra::DMatrix<f64> {
    let d = op.matrix().dense();
    let n = d.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| d[i][j]);
    m.try_inverse().expect("invertible")
}

/// Retained level-N cells by direct recursion on the pattern.
pub fn brute_cells(cells: &[Vec<i64>], l: i64, level: u32) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0i64; cells[0].len()]];
    for _ in 0..level {
        let mut next = Vec::new();
        for c in &out {
            for p in cells {
                next.push(c.iter().zip(p).map(|(a, b)| a * l + b).collect());
            }
        }
        out = next;
    }
    out
}

/// Lattice points lying in the closure of some retained level-N cell.
pub fn brute_vertex_count(cells: &[Vec<i64>], l: i64, level: u32) -> usize {
    let all = brute_cells(cells, l, level);
    let d = cells[0].len();
    let side = l.pow(level);
    let mut count = 0;
    let mut x = vec![0i64; d];
    loop {
        if all.iter().any(|c| c.iter().zip(&x).all(|(ci, xi)| *xi >= *ci && *xi <= ci + 1)) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == d {
                return count;
            }
            x[i] += 1;
            if x[i] <= side {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}
