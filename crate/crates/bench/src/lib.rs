//! Benchmark fixtures.

use gsc_core::{build_outer_graph, CarpetSpec, DirichletOperator, ResourceCaps, SolverChoice, SolverConfig};

/// Operator of the whole level-N outer graph with the chosen solver.
pub fn operator(spec: &CarpetSpec, level: u32, choice: SolverChoice) -> DirichletOperator {
    let caps = ResourceCaps::default();
    let g = build_outer_graph(spec, level, &caps).expect("graph");
    let config = SolverConfig { choice, ..SolverConfig::default() };
    DirichletOperator::assemble(&g, None, config, &caps).expect("operator")
}

/// Unit load at the first vertex.
pub fn unit_rhs(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    b
}
