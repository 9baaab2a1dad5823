#![allow(clippy::needless_range_loop)]

mod common;

use gsc_core::gff::ConditioningGrid;
use gsc_core::{
    build_inner_graph, build_outer_graph, dimensions, equilibrium_potential, half_open_partition,
    harmonic_extension, project_to_inner, validate_gsc, CarpetSpec, DirichletOperator, ResourceCaps,
    SolverConfig,
};
use proptest::prelude::*;

use common::*;

fn caps() -> ResourceCaps {
    ResourceCaps::default()
}

/// Random 3x3 pattern from a 9-bit mask (never empty, never full).
fn pattern(mask: u16) -> Vec<Vec<i64>> {
    (0..9).filter(|b| mask & (1 << b) != 0).map(|b| vec![b / 3, b % 3]).collect()
}

fn apply_isometry(cells: &[Vec<i64>], swap: bool, flip: (bool, bool)) -> Vec<Vec<i64>> {
    cells
        .iter()
        .map(|c| {
            let (mut x, mut y) = (c[0], c[1]);
            if swap {
                std::mem::swap(&mut x, &mut y);
            }
            if flip.0 {
                x = 2 - x;
            }
            if flip.1 {
                y = 2 - y;
            }
            vec![x, y]
        })
        .collect()
}

/// Connected random graph: a path plus chords, diagonals above the degree.
fn random_op(n: usize, chords: &[(usize, usize)], extra: &[f64]) -> DirichletOperator {
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for &(a, b) in chords {
        let (a, b) = (a % n, b % n);
        if a != b && !edges.contains(&(a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let mut deg = vec![0.0; n];
    for &(a, b) in &edges {
        deg[a] += 1.0;
        deg[b] += 1.0;
    }
    let diag: Vec<f64> = (0..n).map(|i| deg[i] + extra[i % extra.len()]).collect();
    graph_op(n, &edges, &diag)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn axioms_are_isometry_invariant(mask in 1u16..511, swap: bool, fx: bool, fy: bool) {
        let cells = pattern(mask);
        let a = CarpetSpec::new(2, 3, cells.clone(), false).unwrap();
        let b = CarpetSpec::new(2, 3, apply_isometry(&cells, swap, (fx, fy)), false).unwrap();
        let (ra, rb) = (validate_gsc(&a), validate_gsc(&b));
        prop_assert_eq!(ra.passed(), rb.passed());
        // symmetry, connectedness and non-diagonality do not depend on orientation
        for k in ["GSC1", "GSC2", "GSC3"] {
            prop_assert_eq!(ra.failures().contains(&k), rb.failures().contains(&k));
        }
    }

    #[test]
    fn half_open_cells_partition_the_vertices(menger: bool, level in 0u32..3, j in 0u32..3) {
        prop_assume!(j <= level);
        let spec = if menger { CarpetSpec::menger_sponge() } else { CarpetSpec::sierpinski_carpet() };
        let g = build_outer_graph(&spec, level, &caps()).unwrap();
        let p = half_open_partition(&spec, j, level).unwrap();
        let s = p.scale();
        let mut hit = vec![false; p.parts().len()];
        for v in 0..g.len() {
            let x = g.coord(v);
            let o = p.owner(x);
            prop_assert!(o.is_some());
            let o = o.unwrap();
            hit[o] = true;
            let c = p.parts().cell(o);
            prop_assert!(x.iter().zip(c).all(|(xi, ci)| *xi >= ci * s && *xi <= (ci + 1) * s));
        }
        prop_assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn transience_criteria_agree(rho in 0.2f64..3.0) {
        for spec in [CarpetSpec::sierpinski_carpet(), CarpetSpec::menger_sponge()] {
            let d = dimensions(&spec, rho).unwrap();
            prop_assert!((d.spectral - 2.0 * d.hausdorff / d.walk).abs() < 1e-12);
            prop_assert_eq!(d.transient, rho < 1.0);
            prop_assert_eq!(d.transient, d.spectral > 2.0);
            prop_assert!((d.time_scale - d.mass * d.rho).abs() < 1e-12);
        }
    }

    #[test]
    fn green_is_symmetric_and_positive(
        n in 3usize..12,
        chords in prop::collection::vec((0usize..12, 0usize..12), 0..6),
        extra in prop::collection::vec(0.0f64..1.5, 1..4),
    ) {
        let mut extra = extra;
        extra[0] += 0.1;
        let op = random_op(n, &chords, &extra);
        for x in 0..n {
            let col = op.green_column(x).unwrap();
            prop_assert!(col[x] > 0.0);
            for y in 0..n {
                let row = op.green_column(y).unwrap();
                prop_assert!((col[y] - row[x]).abs() < 1e-10 * col[x].max(1.0));
                prop_assert!(col[y] >= -1e-12);
            }
        }
    }

    #[test]
    fn harmonic_extension_obeys_maximum_principle(vals in prop::collection::vec(-3.0f64..3.0, 40)) {
        let spec = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&spec, 2, &caps()).unwrap();
        let side = spec.side(2).unwrap();
        let region: Vec<usize> = (0..g.len())
            .filter(|&v| g.coord(v).iter().all(|&c| c > 0 && c < side))
            .collect();
        let boundary: Vec<(usize, f64)> = (0..g.len())
            .filter(|v| !region.contains(v))
            .enumerate()
            .map(|(k, v)| (v, vals[k % vals.len()]))
            .collect();
        let u = harmonic_extension(&g, &region, &boundary, SolverConfig::default(), &caps()).unwrap();
        let lo = boundary.iter().map(|b| b.1).fold(0.0f64, f64::min);
        let hi = boundary.iter().map(|b| b.1).fold(0.0f64, f64::max);
        for v in u {
            prop_assert!(v >= lo - 1e-10 && v <= hi + 1e-10);
        }
    }

    #[test]
    fn conditional_mean_is_nonnegative_for_nonnegative_grid(vals in prop::collection::vec(0.0f64..2.0, 64)) {
        let spec = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&spec, 2, &caps()).unwrap();
        let op = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps()).unwrap();
        let grid: Vec<usize> = (0..g.len()).filter(|&v| g.coord(v).iter().any(|&c| c % 3 == 0)).collect();
        let rips: Vec<usize> = (0..g.len()).filter(|&v| g.coord(v).iter().all(|&c| c % 3 == 1)).collect();
        let cond = ConditioningGrid::new(&op, &grid, &rips, &caps()).unwrap();
        let mut phi = vec![0.0; g.len()];
        for (k, &v) in grid.iter().enumerate() {
            phi[v] = vals[k % vals.len()];
        }
        let dec = cond.decompose(&op, &phi).unwrap();
        prop_assert!(dec.mu.iter().all(|&m| m >= -1e-12));
    }

    #[test]
    fn green_grows_with_the_keep_set(menger: bool, pick in 0usize..64) {
        let spec = if menger { CarpetSpec::menger_sponge() } else { CarpetSpec::sierpinski_carpet() };
        let small = build_outer_graph(&spec, 1, &caps()).unwrap();
        let big = build_outer_graph(&spec, 2, &caps()).unwrap();
        let op_s = DirichletOperator::assemble(&small, None, SolverConfig::default(), &caps()).unwrap();
        let op_b = DirichletOperator::assemble(&big, None, SolverConfig::default(), &caps()).unwrap();
        let x = pick % small.len();
        let bx = op_b.local_index(big.index_of(small.coord(x)).unwrap()).unwrap();
        let cs = op_s.green_column(x).unwrap();
        let cb = op_b.green_column(bx).unwrap();
        for y in 0..small.len() {
            let by = op_b.local_index(big.index_of(small.coord(y)).unwrap()).unwrap();
            prop_assert!(cs[y] <= cb[by] + 1e-12);
        }
    }

    #[test]
    fn capacity_is_monotone_in_the_target(extra in prop::collection::vec(0usize..96, 1..10)) {
        // enlarging the target set can only raise its capacity
        let spec = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&spec, 2, &caps()).unwrap();
        let op = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps()).unwrap();
        let mut s: Vec<usize> = vec![0];
        let c0 = equilibrium_potential(&op, &s, &caps()).unwrap().capacity;
        for e in extra {
            if !s.contains(&e) {
                s.push(e);
            }
        }
        let c1 = equilibrium_potential(&op, &s, &caps()).unwrap().capacity;
        prop_assert!(c0 <= c1 + 1e-12);
    }

    #[test]
    fn projection_is_positive_linear_and_contracting(
        f in prop::collection::vec(-5.0f64..5.0, 96),
        h in prop::collection::vec(-5.0f64..5.0, 96),
        a in -2.0f64..2.0,
    ) {
        let spec = CarpetSpec::sierpinski_carpet();
        let outer = build_outer_graph(&spec, 2, &caps()).unwrap();
        let inner = build_inner_graph(&spec, 2, &caps()).unwrap();
        let qf = project_to_inner(&outer, &inner, &f).unwrap();
        let qh = project_to_inner(&outer, &inner, &h).unwrap();
        let mix: Vec<f64> = f.iter().zip(&h).map(|(x, y)| a * x + y).collect();
        let qm = project_to_inner(&outer, &inner, &mix).unwrap();
        for i in 0..qf.len() {
            prop_assert!((qm[i] - (a * qf[i] + qh[i])).abs() < 1e-12);
        }
        let sup = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(qf.iter().all(|v| v.abs() <= sup + 1e-12));
        let pos: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        prop_assert!(project_to_inner(&outer, &inner, &pos).unwrap().iter().all(|&v| v >= 0.0));
    }
}
