//! Outer, inner and crosswire graphs of a carpet, projections between them and
//! the coarse-graining sets used by the conditioning arguments.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result, ResourceCaps};
use crate::geometry::{
    cells_at_level, check_radix, half_open_partition, pack, CarpetSpec, Cell, LevelCellSet,
    MAX_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    /// Lattice points of the level-N carpet, nearest-neighbour edges.
    Outer,
    /// One vertex per retained level-N cell, stored at doubled coordinates `2c+1`.
    Inner,
    /// Cell centres wired to cell corners, stored at doubled coordinates.
    Crosswire,
    /// Built from explicit vertices and edges.
    Custom,
}

/// Undirected graph on integer points with an ambient degree per vertex.
///
/// Vertex ids are `0..len()`. For the built kinds the ids follow the
/// lexicographic order of the stored coordinates.
#[derive(Debug, Clone)]
pub struct LatticeGraph {
    kind: GraphKind,
    level: u32,
    dimension: usize,
    coords: Vec<i64>,
    radix: u64,
    sorted_keys: Vec<u64>,
    sorted_ids: Vec<u32>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    degree_ambient: Vec<u32>,
}

impl LatticeGraph {
    fn assemble(
        kind: GraphKind,
        level: u32,
        dimension: usize,
        coords: Vec<i64>,
        edges: &[(u32, u32)],
        degree_ambient: Option<Vec<u32>>,
    ) -> Result<Self> {
        let n = coords.len() / dimension;
        let radix = coords.iter().copied().max().unwrap_or(0).max(0) as u64 + 1;
        check_radix(radix, dimension)?;
        if coords.iter().any(|&x| x < 0) {
            return Err(Error::input("vertex coordinates must be non-negative"));
        }
        let mut keyed: Vec<(u64, u32)> = coords
            .chunks_exact(dimension)
            .enumerate()
            .map(|(i, c)| (pack(c, radix), i as u32))
            .collect();
        keyed.sort_unstable();
        if keyed.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::input("duplicate vertex coordinates"));
        }
        let mut deg = vec![0usize; n];
        for &(a, b) in edges {
            if a == b || a as usize >= n || b as usize >= n {
                return Err(Error::input(format!("invalid edge ({a}, {b})")));
            }
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![0u32; offsets[n]];
        for &(a, b) in edges {
            adjacency[fill[a as usize]] = b;
            fill[a as usize] += 1;
            adjacency[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for i in 0..n {
            let row = &mut adjacency[offsets[i]..offsets[i + 1]];
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::input("duplicate edge"));
            }
        }
        let degree_ambient = match degree_ambient {
            Some(d) => {
                if d.len() != n {
                    return Err(Error::input("degree_ambient length mismatch"));
                }
                for i in 0..n {
                    if (d[i] as usize) < deg[i] {
                        return Err(Error::input(format!(
                            "ambient degree {} below graph degree {} at vertex {i}",
                            d[i], deg[i]
                        )));
                    }
                }
                d
            }
            None => deg.iter().map(|&x| x as u32).collect(),
        };
        Ok(LatticeGraph {
            kind,
            level,
            dimension,
            coords,
            radix,
            sorted_keys: keyed.iter().map(|k| k.0).collect(),
            sorted_ids: keyed.iter().map(|k| k.1).collect(),
            offsets,
            adjacency,
            degree_ambient,
        })
    }

    /// Graph from explicit data. `degree_ambient` defaults to the graph degree.
    pub fn from_edges(
        dimension: usize,
        coords: Vec<i64>,
        edges: &[(u32, u32)],
        degree_ambient: Option<Vec<u32>>,
    ) -> Result<Self> {
        if dimension == 0 || !coords.len().is_multiple_of(dimension) {
            return Err(Error::input("coordinate buffer length is not a multiple of the dimension"));
        }
        Self::assemble(GraphKind::Custom, 0, dimension, coords, edges, degree_ambient)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.degree_ambient.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree_ambient.is_empty()
    }

    /// Stored integer coordinates (doubled for inner and crosswire graphs).
    pub fn coord(&self, v: usize) -> &[i64] {
        &self.coords[v * self.dimension..(v + 1) * self.dimension]
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// Position in lattice units: stored coordinates, halved for doubled kinds.
    pub fn position(&self, v: usize) -> Vec<f64> {
        let s = match self.kind {
            GraphKind::Inner | GraphKind::Crosswire => 0.5,
            _ => 1.0,
        };
        self.coord(v).iter().map(|&x| x as f64 * s).collect()
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.dimension || x.iter().any(|&v| v < 0 || v as u64 >= self.radix) {
            return None;
        }
        let k = pack(x, self.radix);
        self.sorted_keys.binary_search(&k).ok().map(|p| self.sorted_ids[p] as usize)
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Degree in the infinite carpet graph; equals `degree` off the far faces.
    pub fn degree_ambient(&self, v: usize) -> u32 {
        self.degree_ambient[v]
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.len() / 2
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |u| {
            self.neighbors(u).iter().filter(move |&&v| (v as usize) > u).map(move |&v| (u, v as usize))
        })
    }
}

fn estimate_vertices(spec: &CarpetSpec, level: u32, caps: &ResourceCaps) -> Result<()> {
    let m = spec.mass() as u64;
    let cells = m.checked_pow(level).unwrap_or(u64::MAX);
    caps.check("vertices", cells, caps.max_vertices)
}

/// Outer graph: lattice points of the level-N carpet with unit-distance edges.
pub fn build_outer_graph(spec: &CarpetSpec, level: u32, caps: &ResourceCaps) -> Result<LatticeGraph> {
    estimate_vertices(spec, level, caps)?;
    let d = spec.dimension();
    let cells = cells_at_level(spec, level, caps)?;
    let side = cells.side();
    let radix = side as u64 + 1;
    check_radix(radix, d)?;
    let mut keys: Vec<u64> = Vec::with_capacity(cells.len() * 2);
    let mut x = [0i64; MAX_DIM];
    let mut q = [0i64; MAX_DIM];
    for c in cells.iter() {
        for o in 0..(1usize << d) {
            for i in 0..d {
                x[i] = c[i] + ((o >> i) & 1) as i64;
            }
            // emit the corner only from the lexicographically smallest retained cell holding it
            let mut owner = true;
            for o2 in 0..(1usize << d) {
                for i in 0..d {
                    q[i] = x[i] - ((o2 >> i) & 1) as i64;
                }
                if q[..d] < c[..] && spec.is_retained(&q[..d], level) {
                    owner = false;
                    break;
                }
            }
            if owner {
                keys.push(pack(&x[..d], radix));
            }
        }
    }
    caps.check("vertices", keys.len() as u64, caps.max_vertices)?;
    keys.sort_unstable();
    let n = keys.len();
    let mut coords = vec![0i64; n * d];
    for (v, &k) in keys.iter().enumerate() {
        let mut r = k;
        for i in (0..d).rev() {
            coords[v * d + i] = (r % radix) as i64;
            r /= radix;
        }
    }
    let lookup = |p: &[i64]| -> Option<usize> {
        if p.iter().any(|&v| v < 0 || v > side) {
            return None;
        }
        keys.binary_search(&pack(p, radix)).ok()
    };
    let mut edges = Vec::with_capacity(n * d);
    let mut ambient = vec![0u32; n];
    let mut y = [0i64; MAX_DIM];
    for v in 0..n {
        let xv = &coords[v * d..(v + 1) * d];
        for i in 0..d {
            y[..d].copy_from_slice(xv);
            y[i] += 1;
            if let Some(u) = lookup(&y[..d]) {
                edges.push((v as u32, u as u32));
            }
            for step in [-1i64, 1] {
                y[..d].copy_from_slice(xv);
                y[i] += step;
                if y[i] >= 0 && spec.contains_point(&y[..d], level + 1) {
                    ambient[v] += 1;
                }
            }
        }
    }
    LatticeGraph::assemble(GraphKind::Outer, level, d, coords, &edges, Some(ambient))
}

/// Inner graph: retained level-N cells, adjacent when they share a face.
pub fn build_inner_graph(spec: &CarpetSpec, level: u32, caps: &ResourceCaps) -> Result<LatticeGraph> {
    estimate_vertices(spec, level, caps)?;
    let d = spec.dimension();
    let cells = cells_at_level(spec, level, caps)?;
    let n = cells.len();
    let mut coords = Vec::with_capacity(n * d);
    for c in cells.iter() {
        coords.extend(c.iter().map(|&x| 2 * x + 1));
    }
    let mut edges = Vec::new();
    let mut ambient = vec![0u32; n];
    let mut y = [0i64; MAX_DIM];
    for (v, c) in cells.iter().enumerate() {
        for i in 0..d {
            y[..d].copy_from_slice(c);
            y[i] += 1;
            if let Some(u) = cells.index_of(&y[..d]) {
                edges.push((v as u32, u as u32));
            }
            for step in [-1i64, 1] {
                y[..d].copy_from_slice(c);
                y[i] += step;
                if spec.is_retained(&y[..d], level + 1) {
                    ambient[v] += 1;
                }
            }
        }
    }
    LatticeGraph::assemble(GraphKind::Inner, level, d, coords, &edges, Some(ambient))
}

/// Crosswire network: every retained cell contributes a centre node joined by
/// unit resistors to its 2^d corners.
pub fn build_crosswire(spec: &CarpetSpec, level: u32, caps: &ResourceCaps) -> Result<LatticeGraph> {
    let outer = build_outer_graph(spec, level, caps)?;
    let cells = cells_at_level(spec, level, caps)?;
    let d = spec.dimension();
    let mut pts: Vec<(Vec<i64>, bool)> = Vec::with_capacity(outer.len() + cells.len());
    for v in 0..outer.len() {
        pts.push((outer.coord(v).iter().map(|&x| 2 * x).collect(), false));
    }
    for c in cells.iter() {
        pts.push((c.iter().map(|&x| 2 * x + 1).collect(), true));
    }
    pts.sort();
    let coords: Vec<i64> = pts.iter().flat_map(|p| p.0.iter().copied()).collect();
    let radix = 2 * cells.side() as u64 + 2;
    let keys: Vec<u64> = pts.iter().map(|p| pack(&p.0, radix)).collect();
    let mut edges = Vec::with_capacity(cells.len() << d);
    let mut corner = [0i64; MAX_DIM];
    for (v, p) in pts.iter().enumerate() {
        if !p.1 {
            continue;
        }
        for o in 0..(1usize << d) {
            for i in 0..d {
                corner[i] = p.0[i] - 1 + 2 * ((o >> i) & 1) as i64;
            }
            let u = keys
                .binary_search(&pack(&corner[..d], radix))
                .map_err(|_| Error::Structural("crosswire corner missing".into()))?;
            edges.push((v as u32, u as u32));
        }
    }
    LatticeGraph::assemble(GraphKind::Crosswire, level, d, coords, &edges, None)
}

/// Corner averages: `(Qf)(w) = 2^-d * sum of f over the corners of cell w`.
pub fn project_to_inner(outer: &LatticeGraph, inner: &LatticeGraph, f: &[f64]) -> Result<Vec<f64>> {
    if outer.kind() != GraphKind::Outer || inner.kind() != GraphKind::Inner {
        return Err(Error::input("project_to_inner needs an outer and an inner graph"));
    }
    if outer.level() != inner.level() {
        return Err(Error::input("outer and inner graphs must share the level"));
    }
    if f.len() != outer.len() {
        return Err(Error::input("function length does not match the outer graph"));
    }
    let d = outer.dimension();
    let w = 1.0 / (1u64 << d) as f64;
    let mut out = Vec::with_capacity(inner.len());
    let mut x = [0i64; MAX_DIM];
    for v in 0..inner.len() {
        let c = inner.coord(v);
        let mut acc = 0.0;
        for o in 0..(1usize << d) {
            for i in 0..d {
                x[i] = (c[i] - 1) / 2 + ((o >> i) & 1) as i64;
            }
            let u = outer
                .index_of(&x[..d])
                .ok_or_else(|| Error::Structural(format!("corner {:?} missing", &x[..d])))?;
            acc += f[u];
        }
        out.push(acc * w);
    }
    Ok(out)
}

/// Averages `f`, given on the level-`fine` cells in lexicographic order, over the
/// descendants of each level-`level` cell.
pub fn mean_value_operator(spec: &CarpetSpec, level: u32, fine: u32, f: &[f64]) -> Result<Vec<f64>> {
    if fine < level {
        return Err(Error::input("fine level must be at least the target level"));
    }
    let caps = ResourceCaps::default();
    let fine_cells = cells_at_level(spec, fine, &caps)?;
    let coarse = cells_at_level(spec, level, &caps)?;
    if f.len() != fine_cells.len() {
        return Err(Error::input(format!(
            "function has {} values, level {fine} has {} cells",
            f.len(),
            fine_cells.len()
        )));
    }
    let scale = spec.side(fine - level)?;
    let d = spec.dimension();
    let mut acc = vec![0.0; coarse.len()];
    let mut a = [0i64; MAX_DIM];
    for (c, &val) in fine_cells.iter().zip(f) {
        for i in 0..d {
            a[i] = c[i] / scale;
        }
        let idx = coarse.index_of(&a[..d]).ok_or_else(|| Error::Structural("ancestor missing".into()))?;
        acc[idx] += val;
    }
    let per = (spec.mass() as f64).powi((fine - level) as i32);
    Ok(acc.into_iter().map(|s| s / per).collect())
}

/// Values of `h` at the centres `(c + 1/2) / l^level` of the retained level cells.
pub fn sample_at_centers(
    spec: &CarpetSpec,
    level: u32,
    h: impl Fn(&[f64]) -> f64,
) -> Result<(LevelCellSet, Vec<f64>)> {
    let cells = cells_at_level(spec, level, &ResourceCaps::default())?;
    let s = cells.side() as f64;
    let vals = cells
        .iter()
        .map(|c| {
            let y: Vec<f64> = c.iter().map(|&x| (x as f64 + 0.5) / s).collect();
            h(&y)
        })
        .collect();
    Ok((cells, vals))
}

/// Grid-bounded neighbourhood of one rip point.
#[derive(Debug, Clone, Serialize)]
pub struct RipSubgraph {
    pub rip: usize,
    /// All vertices, sorted, periphery included.
    pub vertices: Vec<usize>,
    /// Vertices on the conditioning grid.
    pub periphery: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoarseBlock {
    pub cell: Cell,
    pub vertices: Vec<usize>,
    pub rips: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoarseSets {
    pub k: u32,
    pub x0: Cell,
    pub z: Cell,
    /// Representative points `z + l^k p`.
    pub rip: Vec<usize>,
    /// Conditioning grid: some coordinate congruent to `(z - x0)_i` mod `l^k`.
    pub grid: Vec<usize>,
    pub subgraphs: Vec<RipSubgraph>,
    pub blocks: Vec<CoarseBlock>,
}

/// Level-`k` vertex farthest (graph distance) from the faces of the level-`k`
/// block, ties broken lexicographically.
pub fn default_x0(spec: &CarpetSpec, k: u32) -> Result<Cell> {
    let g = build_outer_graph(spec, k, &ResourceCaps::default())?;
    let side = spec.side(k)?;
    let mut dist = vec![usize::MAX; g.len()];
    let mut queue = VecDeque::new();
    for v in 0..g.len() {
        if g.coord(v).iter().any(|&x| x == 0 || x == side) {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v) {
            let u = u as usize;
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let mut best: Option<usize> = None;
    for v in 0..g.len() {
        if dist[v] > 0 && dist[v] != usize::MAX && best.is_none_or(|b| dist[v] > dist[b]) {
            best = Some(v);
        }
    }
    best.map(|v| g.coord(v).to_vec())
        .ok_or_else(|| Error::input(format!("level {k} has no vertex off the block faces")))
}

/// Rip points, conditioning grid, rip subgraphs and half-open blocks of the
/// level-N outer graph `graph`.
pub fn coarse_sets(
    spec: &CarpetSpec,
    graph: &LatticeGraph,
    k: u32,
    x0: &[i64],
    z: &[i64],
) -> Result<CoarseSets> {
    if graph.kind() != GraphKind::Outer {
        return Err(Error::input("coarse_sets needs an outer graph"));
    }
    let n_level = graph.level();
    if k >= n_level {
        return Err(Error::input(format!("k={k} must be below N={n_level}")));
    }
    let d = spec.dimension();
    if x0.len() != d || z.len() != d {
        return Err(Error::input("x0 and z must have one coordinate per axis"));
    }
    let side = spec.side(k)?;
    if !spec.contains_point(x0, k) || x0.iter().any(|&v| v <= 0 || v >= side) {
        return Err(Error::input(format!("x0 {x0:?} is not an interior vertex of the level-{k} block")));
    }
    if !spec.contains_point(z, k) || z.iter().any(|&v| v < 0 || v >= side) {
        return Err(Error::input(format!("z {z:?} is not in the half-open level-{k} cell")));
    }
    let shift: Vec<i64> = (0..d).map(|i| z[i] - x0[i]).collect();
    let on_grid =
        |x: &[i64]| (0..d).any(|i| (x[i] - shift[i]).rem_euclid(side) == 0);
    let is_rip = |x: &[i64]| (0..d).all(|i| x[i] >= z[i] && (x[i] - z[i]) % side == 0);
    let n = graph.len();
    let mut rip = Vec::new();
    let mut grid = Vec::new();
    let mut grid_mask = vec![false; n];
    for v in 0..n {
        let x = graph.coord(v);
        if on_grid(x) {
            grid.push(v);
            grid_mask[v] = true;
        }
        if is_rip(x) {
            rip.push(v);
        }
    }
    let mut rip_mask = vec![false; n];
    for &r in &rip {
        if grid_mask[r] {
            return Err(Error::Structural(format!("rip point {:?} lies on the grid", graph.coord(r))));
        }
        rip_mask[r] = true;
    }
    let mut mark = vec![u32::MAX; n];
    let mut subgraphs = Vec::with_capacity(rip.len());
    for (t, &r) in rip.iter().enumerate() {
        let tag = t as u32;
        let mut vertices = vec![r];
        let mut periphery = Vec::new();
        mark[r] = tag;
        let mut queue = VecDeque::from([r]);
        while let Some(v) = queue.pop_front() {
            for &u in graph.neighbors(v) {
                let u = u as usize;
                if mark[u] == tag {
                    continue;
                }
                mark[u] = tag;
                vertices.push(u);
                if grid_mask[u] {
                    periphery.push(u);
                } else {
                    if rip_mask[u] {
                        return Err(Error::Structural(format!(
                            "rip points {:?} and {:?} share a grid cell",
                            graph.coord(r),
                            graph.coord(u)
                        )));
                    }
                    queue.push_back(u);
                }
            }
        }
        vertices.sort_unstable();
        periphery.sort_unstable();
        subgraphs.push(RipSubgraph { rip: r, vertices, periphery });
    }
    let part = half_open_partition(spec, k, n_level)?;
    let mut blocks: Vec<CoarseBlock> = part
        .parts()
        .iter()
        .map(|c| CoarseBlock { cell: c.to_vec(), vertices: Vec::new(), rips: Vec::new() })
        .collect();
    for v in 0..n {
        let p = part
            .owner(graph.coord(v))
            .ok_or_else(|| Error::Structural(format!("vertex {:?} has no owner", graph.coord(v))))?;
        blocks[p].vertices.push(v);
        if rip_mask[v] {
            blocks[p].rips.push(v);
        }
    }
    Ok(CoarseSets { k, x0: x0.to_vec(), z: z.to_vec(), rip, grid, subgraphs, blocks })
}

/// Centre of a cubic neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    /// Point of the unit cube, scaled by `l^N` and rounded to the lattice.
    Point(Vec<f64>),
    /// Existing vertex id.
    Vertex(usize),
}

/// Vertices within sup-distance `eps * l^N` (lattice units) of the centre.
pub fn cubic_neighborhood(
    spec: &CarpetSpec,
    graph: &LatticeGraph,
    center: &Center,
    eps: f64,
) -> Result<Vec<usize>> {
    if !(eps >= 0.0) {
        return Err(Error::input("eps must be non-negative"));
    }
    let scale = spec.side(graph.level())? as f64;
    let target: Vec<f64> = match center {
        Center::Point(y) => {
            if y.len() != graph.dimension() {
                return Err(Error::input("centre has the wrong dimension"));
            }
            y.iter().map(|&t| (t * scale).round()).collect()
        }
        Center::Vertex(v) => {
            if *v >= graph.len() {
                return Err(Error::input("centre vertex out of range"));
            }
            graph.position(*v)
        }
    };
    let r = eps * scale + 1e-9;
    Ok((0..graph.len())
        .filter(|&v| {
            graph.position(v).iter().zip(&target).all(|(a, b)| (a - b).abs() <= r)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> ResourceCaps {
        ResourceCaps::default()
    }

    #[test]
    fn outer_vertex_counts() {
        let sc = CarpetSpec::sierpinski_carpet();
        let ms = CarpetSpec::menger_sponge();
        let sc_counts: Vec<usize> =
            (0..=4).map(|n| build_outer_graph(&sc, n, &caps()).unwrap().len()).collect();
        assert_eq!(sc_counts, vec![4, 16, 96, 688, 5280]);
        let ms_counts: Vec<usize> =
            (0..=3).map(|n| build_outer_graph(&ms, n, &caps()).unwrap().len()).collect();
        assert_eq!(ms_counts, vec![8, 64, 896, 15616]);
    }

    #[test]
    fn edges_lie_on_retained_cells() {
        for spec in [CarpetSpec::sierpinski_carpet(), CarpetSpec::menger_sponge()] {
            let g = build_outer_graph(&spec, 2, &caps()).unwrap();
            let d = spec.dimension();
            for (u, v) in g.edges() {
                let (a, b) = (g.coord(u), g.coord(v));
                let axis = (0..d).find(|&i| a[i] != b[i]).unwrap();
                let mut found = false;
                for o in 0..(1usize << d) {
                    if (o >> axis) & 1 == 1 {
                        continue;
                    }
                    let c: Vec<i64> = (0..d)
                        .map(|i| if i == axis { a[i].min(b[i]) } else { a[i] - ((o >> i) & 1) as i64 })
                        .collect();
                    found |= spec.is_retained(&c, 2);
                }
                assert!(found, "edge {a:?}-{b:?} not on a retained cell");
            }
        }
    }

    #[test]
    fn ambient_degree_bounds() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&sc, 2, &caps()).unwrap();
        for v in 0..g.len() {
            assert!(g.degree_ambient(v) as usize >= g.degree(v));
            let x = g.coord(v);
            if x.iter().all(|&c| c < 9) {
                assert_eq!(g.degree_ambient(v) as usize, g.degree(v));
            }
        }
        let origin = g.index_of(&[0, 0]).unwrap();
        assert_eq!(g.degree_ambient(origin), 2);
        let far = g.index_of(&[9, 9]).unwrap();
        assert_eq!(g.degree(far), 2);
        assert_eq!(g.degree_ambient(far), 4);
    }

    #[test]
    fn inner_graph_of_carpet_is_a_cycle() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_inner_graph(&sc, 1, &caps()).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.num_edges(), 8);
        assert!((0..8).all(|v| g.degree(v) == 2));
        let g2 = build_inner_graph(&sc, 2, &caps()).unwrap();
        assert_eq!(g2.len(), 64);
    }

    #[test]
    fn crosswire_single_square() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_crosswire(&sc, 0, &caps()).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.num_edges(), 4);
        let centre = g.index_of(&[1, 1]).unwrap();
        assert_eq!(g.degree(centre), 4);
    }

    #[test]
    fn projection_of_constants_and_affine() {
        let sc = CarpetSpec::sierpinski_carpet();
        let outer = build_outer_graph(&sc, 2, &caps()).unwrap();
        let inner = build_inner_graph(&sc, 2, &caps()).unwrap();
        let ones = vec![1.0; outer.len()];
        assert!(project_to_inner(&outer, &inner, &ones).unwrap().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let f: Vec<f64> = (0..outer.len()).map(|v| outer.coord(v)[0] as f64).collect();
        let q = project_to_inner(&outer, &inner, &f).unwrap();
        for w in 0..inner.len() {
            assert!((q[w] - inner.position(w)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_value_preserves_constants() {
        let ms = CarpetSpec::menger_sponge();
        let f = vec![2.5; 400];
        let p = mean_value_operator(&ms, 1, 2, &f).unwrap();
        assert_eq!(p.len(), 20);
        assert!(p.iter().all(|&x| (x - 2.5).abs() < 1e-14));
        assert!(mean_value_operator(&ms, 1, 2, &f[..10]).is_err());
    }

    #[test]
    fn default_representatives() {
        assert_eq!(default_x0(&CarpetSpec::sierpinski_carpet(), 1).unwrap(), vec![1, 1]);
        assert_eq!(default_x0(&CarpetSpec::menger_sponge(), 1).unwrap(), vec![1, 1, 1]);
        assert!(default_x0(&CarpetSpec::sierpinski_carpet(), 0).is_err());
    }

    #[test]
    fn coarse_sets_carpet() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&sc, 2, &caps()).unwrap();
        let cs = coarse_sets(&sc, &g, 1, &[1, 1], &[0, 0]).unwrap();
        assert_eq!(cs.blocks.len(), 8);
        let total: usize = cs.blocks.iter().map(|b| b.vertices.len()).sum();
        assert_eq!(total, g.len());
        assert!(cs.rip.iter().all(|&r| cs.grid.binary_search(&r).is_err()));
        for s in &cs.subgraphs {
            assert!(s.periphery.iter().all(|p| cs.grid.binary_search(p).is_ok()));
        }
        assert!(coarse_sets(&sc, &g, 1, &[0, 1], &[0, 0]).is_err());
        assert!(coarse_sets(&sc, &g, 2, &[1, 1], &[0, 0]).is_err());
    }

    #[test]
    fn neighbourhood_radius() {
        let sc = CarpetSpec::sierpinski_carpet();
        let g = build_outer_graph(&sc, 2, &caps()).unwrap();
        let nb = cubic_neighborhood(&sc, &g, &Center::Point(vec![0.0, 0.0]), 1.0 / 9.0).unwrap();
        assert_eq!(nb.len(), 4);
        let all = cubic_neighborhood(&sc, &g, &Center::Vertex(0), 1.0).unwrap();
        assert_eq!(all.len(), g.len());
    }
}
