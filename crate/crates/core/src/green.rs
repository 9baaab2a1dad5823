//! Killed Laplacians, Green's functions, Schur forms, capacities, resistances and energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResourceCaps};
use crate::geometry::CarpetSpec;
use crate::graphs::{build_crosswire, LatticeGraph};
use crate::solver::{conjugate_gradient, CholeskyFactor, SymCsr, SymbolicCholesky};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Factor when the fill fits `max_factor_nnz`, otherwise iterate.
    #[default]
    Auto,
    Cholesky,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub choice: SolverChoice,
    /// Relative residual target of the iterative path.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { choice: SolverChoice::Auto, cg_tol: 1e-12, cg_max_iter: 100_000 }
    }
}

/// `D_ambient - A` restricted to a kept vertex set, with its solver.
///
/// Vectors passed to and returned from the operator are indexed by local
/// position in `ids()`.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    ids: Vec<usize>,
    local: Vec<u32>,
    dimension: usize,
    coords: Vec<i64>,
    matrix: SymCsr,
    kill: Vec<f64>,
    factor: Option<CholeskyFactor>,
    config: SolverConfig,
}

const ABSENT: u32 = u32::MAX;

impl DirichletOperator {
    /// Operator of the walk on `graph` killed on leaving `keep` (all vertices when `None`).
    pub fn assemble(
        graph: &LatticeGraph,
        keep: Option<&[usize]>,
        config: SolverConfig,
        caps: &ResourceCaps,
    ) -> Result<Self> {
        let ids: Vec<usize> = match keep {
            Some(k) => {
                let mut v = k.to_vec();
                v.sort_unstable();
                if v.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::input("keep set lists a vertex twice"));
                }
                if v.last().is_some_and(|&x| x >= graph.len()) {
                    return Err(Error::input("keep set vertex out of range"));
                }
                v
            }
            None => (0..graph.len()).collect(),
        };
        if ids.is_empty() {
            return Err(Error::input("keep set is empty"));
        }
        caps.check("unknowns", ids.len() as u64, caps.max_unknowns)?;
        let mut local = vec![ABSENT; graph.len()];
        for (k, &v) in ids.iter().enumerate() {
            local[v] = k as u32;
        }
        let mut trips = Vec::with_capacity(ids.len() * (2 * graph.dimension() + 1));
        for (k, &v) in ids.iter().enumerate() {
            trips.push((k as u32, k as u32, graph.degree_ambient(v) as f64));
            for &u in graph.neighbors(v) {
                let lu = local[u as usize];
                if lu != ABSENT {
                    trips.push((k as u32, lu, -1.0));
                }
            }
        }
        let matrix = SymCsr::from_triplets(ids.len(), trips);
        let d = graph.dimension();
        let mut coords = Vec::with_capacity(ids.len() * d);
        for &v in &ids {
            coords.extend_from_slice(graph.coord(v));
        }
        Self::finish(ids, local, d, coords, matrix, config, caps)
    }

    /// Operator from an explicit symmetric matrix; vertex `k` maps to id `k`.
    pub fn from_matrix(
        matrix: SymCsr,
        coords: Vec<i64>,
        dimension: usize,
        config: SolverConfig,
        caps: &ResourceCaps,
    ) -> Result<Self> {
        let n = matrix.n();
        if n == 0 {
            return Err(Error::input("empty operator"));
        }
        caps.check("unknowns", n as u64, caps.max_unknowns)?;
        let ids: Vec<usize> = (0..n).collect();
        let local: Vec<u32> = (0..n as u32).collect();
        Self::finish(ids, local, dimension, coords, matrix, config, caps)
    }

    fn finish(
        ids: Vec<usize>,
        local: Vec<u32>,
        dimension: usize,
        coords: Vec<i64>,
        matrix: SymCsr,
        config: SolverConfig,
        caps: &ResourceCaps,
    ) -> Result<Self> {
        let kill = matrix.row_sums();
        check_killing(&matrix, &kill)?;
        let factor = match config.choice {
            SolverChoice::Cg => None,
            SolverChoice::Auto | SolverChoice::Cholesky => {
                let sym = SymbolicCholesky::analyze(&matrix, &coords, dimension);
                let nnz = sym.factor_nnz() as u64;
                if nnz <= caps.max_factor_nnz {
                    Some(sym.factorize()?)
                } else if config.choice == SolverChoice::Cholesky {
                    return Err(Error::Resource {
                        what: "factor nonzeros",
                        needed: nnz,
                        cap: caps.max_factor_nnz,
                    });
                } else {
                    None
                }
            }
        };
        Ok(DirichletOperator { ids, local, dimension, coords, matrix, kill, factor, config })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Graph vertex id of each local index, increasing.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn local_index(&self, graph_id: usize) -> Option<usize> {
        self.local.get(graph_id).copied().filter(|&l| l != ABSENT).map(|l| l as usize)
    }

    /// Local indices of graph vertices, failing on any vertex outside the keep set.
    pub fn locals(&self, graph_ids: &[usize]) -> Result<Vec<usize>> {
        graph_ids
            .iter()
            .map(|&g| {
                self.local_index(g)
                    .ok_or_else(|| Error::input(format!("vertex {g} is not in the keep set")))
            })
            .collect()
    }

    pub fn matrix(&self) -> &SymCsr {
        &self.matrix
    }

    /// Killing rate per kept vertex: ambient degree minus kept degree.
    pub fn kill(&self) -> &[f64] {
        &self.kill
    }

    /// Diagonal entry, the ambient degree.
    pub fn degree(&self, i: usize) -> f64 {
        self.matrix.get(i, i)
    }

    pub fn coord(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_factorized(&self) -> bool {
        self.factor.is_some()
    }

    pub fn factor(&self) -> Option<&CholeskyFactor> {
        self.factor.as_ref()
    }

    pub fn config(&self) -> SolverConfig {
        self.config
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul(x)
    }

    /// `L^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.len() {
            return Err(Error::input("right-hand side length mismatch"));
        }
        match &self.factor {
            Some(f) => Ok(f.solve(b)),
            None => conjugate_gradient(&self.matrix, b, self.config.cg_tol, self.config.cg_max_iter)
                .map(|r| r.0),
        }
    }

    /// Operator on a subset of the local indices: the walk is also killed on
    /// leaving the subset.
    pub fn restrict(&self, subset: &[usize], caps: &ResourceCaps) -> Result<DirichletOperator> {
        let mut idx = subset.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Err(Error::input("empty subset"));
        }
        if idx.last().is_some_and(|&i| i >= self.len()) {
            return Err(Error::input("subset index out of range"));
        }
        let matrix = self.matrix.principal(&idx);
        let d = self.dimension;
        let mut coords = Vec::with_capacity(idx.len() * d);
        for &i in &idx {
            coords.extend_from_slice(self.coord(i));
        }
        let ids: Vec<usize> = idx.iter().map(|&i| self.ids[i]).collect();
        let mut local = vec![ABSENT; self.local.len()];
        for (k, &g) in ids.iter().enumerate() {
            local[g] = k as u32;
        }
        Self::finish(ids, local, d, coords, matrix, self.config, caps)
    }

    /// Canonical Green's column `G(., w)` for local `w`.
    pub fn green_column(&self, w: usize) -> Result<Vec<f64>> {
        if w >= self.len() {
            return Err(Error::input(format!("index {w} outside the keep set")));
        }
        let mut e = vec![0.0; self.len()];
        e[w] = 1.0;
        self.solve(&e)
    }

    /// `G(x, y)` for local pairs, one solve per distinct column.
    pub fn green_entries(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        let mut cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        cols.sort_unstable();
        cols.dedup();
        let mut cache = std::collections::HashMap::new();
        for &c in &cols {
            cache.insert(c, self.green_column(c)?);
        }
        pairs
            .iter()
            .map(|&(x, y)| {
                if x >= self.len() {
                    Err(Error::input(format!("index {x} outside the keep set")))
                } else {
                    Ok(cache[&y][x])
                }
            })
            .collect()
    }

    /// Random-walk Green's function `G(x, y) * deg(y)`.
    pub fn green_rw(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.green_entries(&[(x, y)])?[0] * self.degree(y))
    }

    /// Diagonal `G(x, x)` at the given local indices.
    pub fn green_diagonal(&self, xs: &[usize]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.green_column(x).map(|c| c[x])).collect()
    }
}

fn check_killing(matrix: &SymCsr, kill: &[f64]) -> Result<()> {
    let n = matrix.n();
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        stack.push(s);
        let mut size = 0usize;
        let mut killed = false;
        while let Some(v) = stack.pop() {
            size += 1;
            killed |= kill[v] > 1e-12 * matrix.get(v, v).abs().max(1.0);
            for (u, a) in matrix.row(v) {
                if a != 0.0 && comp[u] == usize::MAX {
                    comp[u] = s;
                    stack.push(u);
                }
            }
        }
        if !killed {
            return Err(Error::NonTransient(format!(
                "a component of {size} kept vertices (containing local index {s}) has no killing"
            )));
        }
    }
    Ok(())
}

/// `<f, (G_S)^{-1} f>` with `G_S` the restriction of the operator's Green's
/// function to `subset` (local indices), by Schur complement.
pub fn quad_form_inverse_green(
    op: &DirichletOperator,
    subset: &[usize],
    f: &[f64],
    caps: &ResourceCaps,
) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::input("subset is empty"));
    }
    if f.len() != subset.len() {
        return Err(Error::input("function length does not match the subset"));
    }
    let n = op.len();
    let mut in_s = vec![false; n];
    for &s in subset {
        if s >= n || in_s[s] {
            return Err(Error::input("subset index out of range or repeated"));
        }
        in_s[s] = true;
    }
    let m = op.matrix();
    let direct = {
        let mut xs = vec![0.0; n];
        for (k, &s) in subset.iter().enumerate() {
            xs[s] = f[k];
        }
        subset.iter().enumerate().map(|(k, &s)| f[k] * m.row(s).map(|(j, v)| v * xs[j]).sum::<f64>()).sum::<f64>()
    };
    let rest: Vec<usize> = (0..n).filter(|&i| !in_s[i]).collect();
    if rest.is_empty() {
        return Ok(direct);
    }
    let r = m.block_mul(&rest, subset, f);
    if r.iter().all(|&v| v == 0.0) {
        return Ok(direct);
    }
    let sub = op.restrict(&rest, caps)?;
    let y = sub.solve(&r)?;
    Ok(direct - r.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>())
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    /// Potential on the keep set (local indexing).
    pub potential: Vec<f64>,
    /// Capacity: energy of the potential, killing included.
    pub capacity: f64,
    /// Equilibrium measure on the target, in the order given.
    pub measure: Vec<f64>,
}

/// Equilibrium potential of `target` (local indices) in the operator's keep set.
pub fn equilibrium_potential(
    op: &DirichletOperator,
    target: &[usize],
    caps: &ResourceCaps,
) -> Result<Equilibrium> {
    if target.is_empty() {
        return Err(Error::input("target set is empty"));
    }
    let n = op.len();
    let mut in_b = vec![false; n];
    for &b in target {
        if b >= n {
            return Err(Error::input("target index out of range"));
        }
        in_b[b] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_b[i]).collect();
    let mut e = vec![0.0; n];
    for &b in target {
        e[b] = 1.0;
    }
    if !rest.is_empty() {
        let ones: Vec<f64> = vec![1.0; target.len()];
        let rhs: Vec<f64> = op.matrix().block_mul(&rest, target, &ones).iter().map(|v| -v).collect();
        if rhs.iter().any(|&v| v != 0.0) {
            let sub = op.restrict(&rest, caps)?;
            let u = sub.solve(&rhs)?;
            for (k, &i) in rest.iter().enumerate() {
                e[i] = u[k];
            }
        }
    }
    let capacity = operator_energy(op, &e);
    let le = op.apply(&e);
    let measure = target.iter().map(|&b| le[b]).collect();
    Ok(Equilibrium { potential: e, capacity, measure })
}

/// Energy `sum over kept edges (f(x)-f(y))^2 + sum kill(x) f(x)^2`, edge by edge.
pub fn operator_energy(op: &DirichletOperator, f: &[f64]) -> f64 {
    let m = op.matrix();
    let mut e = 0.0;
    for i in 0..op.len() {
        for (j, v) in m.row(i) {
            if j > i && v != 0.0 {
                e += -v * (f[i] - f[j]).powi(2);
            }
        }
        e += op.kill()[i] * f[i] * f[i];
    }
    e
}

/// Solves `L u = 0` on `region` (graph ids) with values `boundary` given on
/// graph vertices outside the region; unspecified outside values and the
/// exterior of the graph count as 0. Returns `u` in region order.
pub fn harmonic_extension(
    graph: &LatticeGraph,
    region: &[usize],
    boundary: &[(usize, f64)],
    config: SolverConfig,
    caps: &ResourceCaps,
) -> Result<Vec<f64>> {
    let op = DirichletOperator::assemble(graph, Some(region), config, caps)?;
    let mut g = vec![0.0; graph.len()];
    for &(v, val) in boundary {
        if v >= graph.len() {
            return Err(Error::input("boundary vertex out of range"));
        }
        if op.local_index(v).is_some() {
            return Err(Error::input(format!("boundary vertex {v} lies inside the region")));
        }
        g[v] = val;
    }
    let rhs: Vec<f64> = op
        .ids()
        .iter()
        .map(|&x| graph.neighbors(x).iter().map(|&y| g[y as usize]).sum())
        .collect();
    let u = op.solve(&rhs)?;
    let mut out = vec![0.0; region.len()];
    for (k, &r) in region.iter().enumerate() {
        out[k] = u[op.local_index(r).unwrap()];
    }
    Ok(out)
}

/// How values outside the graph are treated by `dirichlet_energy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Graph edges only.
    Free,
    /// Also the edges to ambient neighbours outside the graph, where the function is 0.
    Killed,
}

/// `sum over edges (f(x)-f(y))(g(x)-g(y))`, plus `kill(x) f(x) g(x)` when killed.
pub fn dirichlet_energy(graph: &LatticeGraph, f: &[f64], g: Option<&[f64]>, mode: Boundary) -> Result<f64> {
    let g = g.unwrap_or(f);
    if f.len() != graph.len() || g.len() != graph.len() {
        return Err(Error::input("function length does not match the graph"));
    }
    let mut e = 0.0;
    for (x, y) in graph.edges() {
        e += (f[x] - f[y]) * (g[x] - g[y]);
    }
    if mode == Boundary::Killed {
        for x in 0..graph.len() {
            let k = graph.degree_ambient(x) as f64 - graph.degree(x) as f64;
            e += k * f[x] * g[x];
        }
    }
    Ok(e)
}

/// `rho^{-level} * normalizer^{-2} * h^T G h` with `h` indexed like the operator.
pub fn green_form(op: &DirichletOperator, h: &[f64], rho_hat: f64, level: u32, normalizer: f64) -> Result<f64> {
    if h.len() != op.len() {
        return Err(Error::input("density length does not match the operator"));
    }
    if !(rho_hat > 0.0) || !(normalizer > 0.0) {
        return Err(Error::input("rho_hat and normalizer must be positive"));
    }
    let gh = op.solve(h)?;
    let q: f64 = h.iter().zip(&gh).map(|(a, b)| a * b).sum();
    Ok(q * rho_hat.powi(-(level as i32)) / (normalizer * normalizer))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResistanceResult {
    pub level: u32,
    pub resistance: f64,
    /// `R_N / R_{N-1}` when the previous level was computed.
    pub rho_hat: Option<f64>,
}

/// Effective resistance of the crosswire network between the shorted faces
/// `x_1 = 0` and `x_1 = l^N`.
pub fn crosswire_resistance(spec: &CarpetSpec, level: u32, caps: &ResourceCaps) -> Result<ResistanceResult> {
    let g = build_crosswire(spec, level, caps)?;
    let far = 2 * spec.side(level)?;
    let d = g.dimension();
    // node 0 is the merged left face, the right face is grounded and dropped
    let mut node = vec![0u32; g.len()];
    let mut count = 1u32;
    let mut coords: Vec<i64> = vec![0; d];
    const GROUND: u32 = u32::MAX;
    for v in 0..g.len() {
        let x0 = g.coord(v)[0];
        node[v] = if x0 == 0 {
            0
        } else if x0 == far {
            GROUND
        } else {
            coords.extend_from_slice(g.coord(v));
            count += 1;
            count - 1
        };
    }
    let mut trips = Vec::new();
    for (a, b) in g.edges() {
        let (na, nb) = (node[a], node[b]);
        if na == nb {
            continue;
        }
        if na != GROUND {
            trips.push((na, na, 1.0));
        }
        if nb != GROUND {
            trips.push((nb, nb, 1.0));
        }
        if na != GROUND && nb != GROUND {
            trips.push((na, nb, -1.0));
            trips.push((nb, na, -1.0));
        }
    }
    let m = SymCsr::from_triplets(count as usize, trips);
    let op = DirichletOperator::from_matrix(m, coords, d, SolverConfig::default(), caps)?;
    let mut b = vec![0.0; op.len()];
    b[0] = 1.0;
    let v = op.solve(&b)?;
    Ok(ResistanceResult { level, resistance: v[0], rho_hat: None })
}

/// Resistances for levels `1..=n_max`, each with the successive ratio.
pub fn resistance_sequence(spec: &CarpetSpec, n_max: u32, caps: &ResourceCaps) -> Result<Vec<ResistanceResult>> {
    let mut out: Vec<ResistanceResult> = Vec::new();
    for n in 1..=n_max {
        let mut r = crosswire_resistance(spec, n, caps)?;
        r.rho_hat = out.last().map(|p| r.resistance / p.resistance);
        out.push(r);
    }
    Ok(out)
}

/// `R_{n_max} / R_{n_max - 1}`.
pub fn estimate_rho(spec: &CarpetSpec, n_max: u32, caps: &ResourceCaps) -> Result<f64> {
    if n_max < 2 {
        return Err(Error::input("estimate_rho needs n_max >= 2"));
    }
    let a = crosswire_resistance(spec, n_max - 1, caps)?;
    let b = crosswire_resistance(spec, n_max, caps)?;
    Ok(b.resistance / a.resistance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_inner_graph, build_outer_graph};

    fn caps() -> ResourceCaps {
        ResourceCaps::default()
    }

    fn path_ab() -> LatticeGraph {
        LatticeGraph::from_edges(1, vec![0, 1], &[(0, 1)], Some(vec![2, 2])).unwrap()
    }

    #[test]
    fn single_vertex_inverse() {
        let g = LatticeGraph::from_edges(2, vec![0, 0], &[], Some(vec![5])).unwrap();
        let op = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps()).unwrap();
        assert!((op.green_entries(&[(0, 0)]).unwrap()[0] - 0.2).abs() < 1e-15);
        assert!((op.green_rw(0, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_vertex_path() {
        let op = DirichletOperator::assemble(&path_ab(), None, SolverConfig::default(), &caps()).unwrap();
        let g = op.green_entries(&[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let want = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let q = quad_form_inverse_green(&op, &[0], &[1.0], &caps()).unwrap();
        assert!((q - 1.5).abs() < 1e-14);
        let full = quad_form_inverse_green(&op, &[0, 1], &[1.0, 1.0], &caps()).unwrap();
        assert!((full - 2.0).abs() < 1e-14);
    }

    #[test]
    fn no_killing_is_rejected() {
        let g = LatticeGraph::from_edges(1, vec![0, 1], &[(0, 1)], None).unwrap();
        let r = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps());
        assert!(matches!(r, Err(Error::NonTransient(_))));
    }

    #[test]
    fn cg_and_cholesky_agree() {
        let ms = CarpetSpec::menger_sponge();
        let g = build_outer_graph(&ms, 2, &caps()).unwrap();
        let a = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps()).unwrap();
        let cfg = SolverConfig { choice: SolverChoice::Cg, ..Default::default() };
        let b = DirichletOperator::assemble(&g, None, cfg, &caps()).unwrap();
        assert!(a.is_factorized() && !b.is_factorized());
        let ca = a.green_column(17).unwrap();
        let cb = b.green_column(17).unwrap();
        for (x, y) in ca.iter().zip(&cb) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_path() {
        let g = LatticeGraph::from_edges(1, vec![0, 1, 2], &[(0, 1), (1, 2)], None).unwrap();
        let u = harmonic_extension(&g, &[1], &[(0, 0.0), (2, 1.0)], SolverConfig::default(), &caps()).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_single_vertex_and_whole_set() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&sc, 2, &caps()).unwrap();
        let op = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps()).unwrap();
        let eq = equilibrium_potential(&op, &[40], &caps()).unwrap();
        let gxx = op.green_entries(&[(40, 40)]).unwrap()[0];
        assert!((eq.capacity * gxx - 1.0).abs() < 1e-10);
        let all: Vec<usize> = (0..op.len()).collect();
        let eq = equilibrium_potential(&op, &all, &caps()).unwrap();
        let boundary_edges: f64 = op.kill().iter().sum();
        assert!((eq.capacity - boundary_edges).abs() < 1e-9);
        assert!((eq.measure.iter().sum::<f64>() - eq.capacity).abs() < 1e-9);
    }

    #[test]
    fn energy_basics() {
        let g = LatticeGraph::from_edges(1, vec![0, 1], &[(0, 1)], None).unwrap();
        assert_eq!(dirichlet_energy(&g, &[1.0, 0.0], None, Boundary::Free).unwrap(), 1.0);
        assert_eq!(dirichlet_energy(&g, &[3.0, 3.0], None, Boundary::Free).unwrap(), 0.0);
    }

    #[test]
    fn crosswire_square_and_cube() {
        let sq = CarpetSpec::full_cube(2, 3).unwrap();
        let r0 = crosswire_resistance(&sq, 0, &caps()).unwrap();
        assert!((r0.resistance - 1.0).abs() < 1e-12);
        let cube = CarpetSpec::full_cube(3, 3).unwrap();
        for n in 0..=2 {
            let r = crosswire_resistance(&cube, n, &caps()).unwrap();
            let want = 3f64.powi(n as i32) / (2.0 * 9f64.powi(n as i32));
            assert!((r.resistance - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn inner_cycle_green_form() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_inner_graph(&sc, 1, &caps()).unwrap();
        let op = DirichletOperator::assemble(&g, None, SolverConfig::default(), &caps()).unwrap();
        let h = vec![1.0; 8];
        let v = green_form(&op, &h, 1.0, 1, 8.0).unwrap();
        let mut s = 0.0;
        for x in 0..8 {
            s += op.green_column(x).unwrap().iter().sum::<f64>();
        }
        assert!((v - s / 64.0).abs() < 1e-13);
    }
}
