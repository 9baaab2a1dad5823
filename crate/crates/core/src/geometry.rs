//! Generator patterns, axiom checks, level-N cell enumeration and half-open partitions.

use serde::Serialize;

use crate::error::{Error, Result, ResourceCaps};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Coordinates of one cell or lattice point.
pub type Cell = Vec<i64>;

/// Generator pattern of a carpet: the retained level-1 subcells of the unit cube.
#[derive(Debug, Clone, Serialize)]
pub struct CarpetSpec {
    dimension: usize,
    length_scale: i64,
    cells: Vec<Cell>,
    allow_full_cube: bool,
    #[serde(skip)]
    mask: Vec<bool>,
}

impl PartialEq for CarpetSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.length_scale == other.length_scale
            && self.cells == other.cells
            && self.allow_full_cube == other.allow_full_cube
    }
}

impl CarpetSpec {
    pub fn new(
        dimension: usize,
        length_scale: i64,
        cells: Vec<Cell>,
        allow_full_cube: bool,
    ) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::input(format!("dimension must be at least 2, got {dimension}")));
        }
        if dimension > MAX_DIM {
            return Err(Error::input(format!(
                "dimension {dimension} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        if length_scale < 3 {
            return Err(Error::input(format!(
                "length_scale must be at least 3, got {length_scale}"
            )));
        }
        let volume = checked_pow(length_scale, dimension as u32)
            .filter(|v| *v <= 1 << 24)
            .ok_or_else(|| Error::input("length_scale^dimension is too large"))?;
        if cells.is_empty() {
            return Err(Error::input("pattern has no cells"));
        }
        let mut mask = vec![false; volume as usize];
        for (k, c) in cells.iter().enumerate() {
            if c.len() != dimension {
                return Err(Error::input(format!(
                    "cell #{k} has {} coordinates, expected {dimension}",
                    c.len()
                )));
            }
            if let Some(bad) = c.iter().find(|&&x| x < 0 || x >= length_scale) {
                return Err(Error::input(format!(
                    "cell #{k} {c:?} has coordinate {bad} outside 0..{}",
                    length_scale - 1
                )));
            }
            let idx = pattern_index(c, length_scale);
            if mask[idx] {
                return Err(Error::input(format!("cell {c:?} listed twice")));
            }
            mask[idx] = true;
        }
        if cells.len() as i64 == volume && !allow_full_cube {
            return Err(Error::input(
                "pattern retains every subcell; set allow_full_cube for calibration runs",
            ));
        }
        let mut cells = cells;
        cells.sort();
        Ok(CarpetSpec { dimension, length_scale, cells, allow_full_cube, mask })
    }

    /// Standard Sierpinski carpet: 3x3 minus the centre.
    pub fn sierpinski_carpet() -> Self {
        let mut cells = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (1, 1) {
                    cells.push(vec![i, j]);
                }
            }
        }
        CarpetSpec::new(2, 3, cells, false).expect("valid preset")
    }

    /// Menger sponge: 27 cells minus the 6 face centres and the body centre.
    pub fn menger_sponge() -> Self {
        let mut cells = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let ones = [i, j, k].iter().filter(|&&x| x == 1).count();
                    if ones < 2 {
                        cells.push(vec![i, j, k]);
                    }
                }
            }
        }
        CarpetSpec::new(3, 3, cells, false).expect("valid preset")
    }

    /// Every subcell retained; only useful for lattice calibration.
    pub fn full_cube(dimension: usize, length_scale: i64) -> Result<Self> {
        let mut cells = Vec::new();
        for_each_in_box(dimension, length_scale, |c| cells.push(c.to_vec()));
        CarpetSpec::new(dimension, length_scale, cells, true)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn length_scale(&self) -> i64 {
        self.length_scale
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Number of retained subcells m.
    pub fn mass(&self) -> usize {
        self.cells.len()
    }

    pub fn allow_full_cube(&self) -> bool {
        self.allow_full_cube
    }

    pub fn is_full_cube(&self) -> bool {
        self.cells.len() == self.mask.len()
    }

    /// `length_scale^level`, or an input error on overflow.
    pub fn side(&self, level: u32) -> Result<i64> {
        checked_pow(self.length_scale, level)
            .filter(|v| *v < 1 << 40)
            .ok_or_else(|| Error::input(format!("level {level} is too deep")))
    }

    /// Whether `cell` is one of the pattern cells.
    pub fn pattern_contains(&self, cell: &[i64]) -> bool {
        cell.len() == self.dimension
            && cell.iter().all(|&x| (0..self.length_scale).contains(&x))
            && self.mask[pattern_index(cell, self.length_scale)]
    }

    /// Whether the cell with integer origin `cell` is retained at `level`.
    pub fn is_retained(&self, cell: &[i64], level: u32) -> bool {
        let l = self.length_scale;
        let side = l.pow(level);
        if cell.iter().any(|&x| x < 0 || x >= side) {
            return false;
        }
        let mut div = 1i64;
        for _ in 0..level {
            let mut idx = 0usize;
            for &x in cell {
                idx = idx * l as usize + ((x / div) % l) as usize;
            }
            if !self.mask[idx] {
                return false;
            }
            div *= l;
        }
        true
    }

    /// Whether the lattice point `x` lies in the closure of some retained level-`level` cell.
    pub fn contains_point(&self, x: &[i64], level: u32) -> bool {
        let d = self.dimension;
        let mut buf = [0i64; MAX_DIM];
        for o in 0..(1usize << d) {
            for i in 0..d {
                buf[i] = x[i] - ((o >> i) & 1) as i64;
            }
            if self.is_retained(&buf[..d], level) {
                return true;
            }
        }
        false
    }
}

fn checked_pow(base: i64, exp: u32) -> Option<i64> {
    base.checked_pow(exp)
}

fn pattern_index(cell: &[i64], l: i64) -> usize {
    cell.iter().fold(0usize, |acc, &x| acc * l as usize + x as usize)
}

/// Calls `f` for every point of `{0,..,side-1}^d` in lexicographic order.
pub(crate) fn for_each_in_box(d: usize, side: i64, mut f: impl FnMut(&[i64])) {
    if side <= 0 {
        return;
    }
    let mut c = vec![0i64; d];
    loop {
        f(&c);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            c[i] += 1;
            if c[i] < side {
                break;
            }
            c[i] = 0;
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Counterexample attached to a failed axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `cell` is retained but its image under the isometry is not.
    Isometry { permutation: Vec<usize>, reflections: Vec<bool>, cell: Cell, image: Cell },
    /// No chain of touching cells joins `from` and `to`.
    Disconnected { from: Cell, to: Cell },
    /// The retained cells of the 2-per-axis block at `origin` are not face connected.
    DiagonalBlock { level: u32, origin: Cell },
    /// A cell of the bottom edge row is missing.
    MissingBorderCell { cell: Cell },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    Fail { witness: Witness },
}

impl AxiomStatus {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomStatus::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub symmetry: AxiomStatus,
    pub connectedness: AxiomStatus,
    pub non_diagonality: AxiomStatus,
    pub borders: AxiomStatus,
    /// Set when the full cube was admitted through `allow_full_cube`.
    pub calibration_mode: bool,
    /// Whether the non-diagonality check was repeated on level-2 blocks.
    pub deep_checked: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.symmetry.passed()
            && self.connectedness.passed()
            && self.non_diagonality.passed()
            && self.borders.passed()
    }

    /// Names of the failed axioms, in order.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, s) in [
            ("GSC1", &self.symmetry),
            ("GSC2", &self.connectedness),
            ("GSC3", &self.non_diagonality),
            ("GSC4", &self.borders),
        ] {
            if !s.passed() {
                out.push(name);
            }
        }
        out
    }
}

pub fn validate_gsc(spec: &CarpetSpec) -> ValidationReport {
    validate_gsc_with(spec, false)
}

/// Runs all four axiom checks; `deep` repeats non-diagonality on level-2 blocks.
pub fn validate_gsc_with(spec: &CarpetSpec, deep: bool) -> ValidationReport {
    let mut non_diagonality = check_non_diagonal(spec, 1);
    if deep && non_diagonality.passed() {
        non_diagonality = check_non_diagonal(spec, 2);
    }
    ValidationReport {
        symmetry: check_symmetry(spec),
        connectedness: check_connected(spec),
        non_diagonality,
        borders: check_borders(spec),
        calibration_mode: spec.is_full_cube(),
        deep_checked: deep,
    }
}

fn check_symmetry(spec: &CarpetSpec) -> AxiomStatus {
    let d = spec.dimension;
    let l = spec.length_scale;
    for perm in permutations(d) {
        for flips in 0..(1usize << d) {
            for c in &spec.cells {
                let image: Cell = (0..d)
                    .map(|i| {
                        let v = c[perm[i]];
                        if (flips >> i) & 1 == 1 {
                            l - 1 - v
                        } else {
                            v
                        }
                    })
                    .collect();
                if !spec.pattern_contains(&image) {
                    return AxiomStatus::Fail {
                        witness: Witness::Isometry {
                            permutation: perm.clone(),
                            reflections: (0..d).map(|i| (flips >> i) & 1 == 1).collect(),
                            cell: c.clone(),
                            image,
                        },
                    };
                }
            }
        }
    }
    AxiomStatus::Pass
}

fn check_connected(spec: &CarpetSpec) -> AxiomStatus {
    let cells = &spec.cells;
    let touching = |a: &Cell, b: &Cell| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1);
    let mut seen = vec![false; cells.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..cells.len() {
            if !seen[j] && touching(&cells[i], &cells[j]) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        None => AxiomStatus::Pass,
        Some(j) => AxiomStatus::Fail {
            witness: Witness::Disconnected { from: cells[0].clone(), to: cells[j].clone() },
        },
    }
}

/// Level-`level` blocks of 2 cells per axis; a cell counts as present when it
/// refines a retained pattern cell.
fn check_non_diagonal(spec: &CarpetSpec, level: u32) -> AxiomStatus {
    let d = spec.dimension;
    let l = spec.length_scale;
    let side = l.pow(level);
    let present = |c: &[i64]| -> bool {
        let scale = side / l;
        let parent: Vec<i64> = c.iter().map(|&x| x / scale).collect();
        spec.pattern_contains(&parent)
    };
    let mut failure = None;
    for_each_in_box(d, side - 1, |origin| {
        if failure.is_some() {
            return;
        }
        let mut members: Vec<Vec<i64>> = Vec::new();
        for o in 0..(1usize << d) {
            let c: Vec<i64> = (0..d).map(|i| origin[i] + ((o >> i) & 1) as i64).collect();
            if present(&c) {
                members.push(c);
            }
        }
        if members.is_empty() {
            return;
        }
        let face = |a: &Vec<i64>, b: &Vec<i64>| {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() == 1
        };
        let mut seen = vec![false; members.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..members.len() {
                if !seen[j] && face(&members[i], &members[j]) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            failure = Some(origin.to_vec());
        }
    });
    match failure {
        None => AxiomStatus::Pass,
        Some(origin) => AxiomStatus::Fail { witness: Witness::DiagonalBlock { level, origin } },
    }
}

fn check_borders(spec: &CarpetSpec) -> AxiomStatus {
    for i in 0..spec.length_scale {
        let mut c = vec![0; spec.dimension];
        c[0] = i;
        if !spec.pattern_contains(&c) {
            return AxiomStatus::Fail { witness: Witness::MissingBorderCell { cell: c } };
        }
    }
    AxiomStatus::Pass
}

/// Packs a point with coordinates in `0..radix` into one sortable key.
pub(crate) fn pack(x: &[i64], radix: u64) -> u64 {
    x.iter().fold(0u64, |acc, &v| acc * radix + v as u64)
}

pub(crate) fn check_radix(radix: u64, d: usize) -> Result<()> {
    let mut total: u128 = 1;
    for _ in 0..d {
        total *= radix as u128;
    }
    if total >= 1u128 << 63 {
        return Err(Error::input("lattice too large for 64-bit vertex keys"));
    }
    Ok(())
}

/// Retained cells of one level, sorted lexicographically.
#[derive(Debug, Clone)]
pub struct LevelCellSet {
    level: u32,
    dimension: usize,
    side: i64,
    coords: Vec<i64>,
    keys: Vec<u64>,
}

impl LevelCellSet {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Cells per axis, `length_scale^level`.
    pub fn side(&self) -> i64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn cell(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.coords.chunks_exact(self.dimension)
    }

    pub fn index_of(&self, cell: &[i64]) -> Option<usize> {
        if cell.len() != self.dimension || cell.iter().any(|&x| x < 0 || x >= self.side) {
            return None;
        }
        self.keys.binary_search(&pack(cell, self.side as u64)).ok()
    }
}

/// All retained cells at `level`, by recursive substitution.
pub fn cells_at_level(spec: &CarpetSpec, level: u32, caps: &ResourceCaps) -> Result<LevelCellSet> {
    let d = spec.dimension;
    let m = spec.mass() as u64;
    let count = m.checked_pow(level).unwrap_or(u64::MAX);
    caps.check("level cells", count, caps.max_vertices)?;
    let side = spec.side(level)?;
    check_radix(side as u64, d)?;
    let l = spec.length_scale;
    let mut cur: Vec<i64> = vec![0; d];
    for _ in 0..level {
        let mut next = Vec::with_capacity(cur.len() * spec.mass());
        for c in cur.chunks_exact(d) {
            for b in &spec.cells {
                for i in 0..d {
                    next.push(l * c[i] + b[i]);
                }
            }
        }
        cur = next;
    }
    let mut keyed: Vec<(u64, usize)> =
        cur.chunks_exact(d).enumerate().map(|(i, c)| (pack(c, side as u64), i)).collect();
    keyed.sort_unstable();
    let mut coords = Vec::with_capacity(cur.len());
    for &(_, i) in &keyed {
        coords.extend_from_slice(&cur[i * d..(i + 1) * d]);
    }
    Ok(LevelCellSet {
        level,
        dimension: d,
        side,
        coords,
        keys: keyed.into_iter().map(|(k, _)| k).collect(),
    })
}

/// Partition of the level-N lattice into half-open level-(N-j) cells of side `length_scale^j`.
#[derive(Debug, Clone)]
pub struct HalfOpenPartition {
    level: u32,
    scale: i64,
    cells: LevelCellSet,
}

pub fn half_open_partition(spec: &CarpetSpec, j: u32, level: u32) -> Result<HalfOpenPartition> {
    if j > level {
        return Err(Error::input(format!("partition scale j={j} exceeds level N={level}")));
    }
    let cells = cells_at_level(spec, level - j, &ResourceCaps::default())?;
    Ok(HalfOpenPartition { level, scale: spec.side(j)?, cells })
}

impl HalfOpenPartition {
    /// Level N of the partitioned lattice.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Side length of each part in lattice units.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn parts(&self) -> &LevelCellSet {
        &self.cells
    }

    /// Index (into `parts()`) of the part owning lattice point `x`, or `None`
    /// when `x` is not a vertex of the level-N carpet.
    pub fn owner(&self, x: &[i64]) -> Option<usize> {
        let d = self.cells.dimension;
        if x.len() != d {
            return None;
        }
        let last = self.cells.side - 1;
        let mut p = [0i64; MAX_DIM];
        for i in 0..d {
            if x[i] < 0 || x[i] > self.cells.side * self.scale {
                return None;
            }
            p[i] = (x[i] / self.scale).min(last);
        }
        if let Some(idx) = self.cells.index_of(&p[..d]) {
            return Some(idx);
        }
        let mut best: Option<usize> = None;
        let mut q = [0i64; MAX_DIM];
        for o in 0..(1usize << d) {
            let mut ok = true;
            for i in 0..d {
                let lo = x[i] / self.scale;
                q[i] = if (o >> i) & 1 == 1 {
                    if x[i] % self.scale != 0 {
                        ok = false;
                        break;
                    }
                    lo - 1
                } else {
                    lo
                };
            }
            if !ok {
                continue;
            }
            if let Some(idx) = self.cells.index_of(&q[..d]) {
                best = Some(best.map_or(idx, |b: usize| b.min(idx)));
            }
        }
        best
    }
}

/// Hausdorff, walk and spectral dimensions from the scale factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionReport {
    pub mass: f64,
    pub length_scale: f64,
    pub rho: f64,
    /// Time scale factor `m * rho`.
    pub time_scale: f64,
    pub hausdorff: f64,
    pub walk: f64,
    pub spectral: f64,
    pub transient: bool,
}

pub fn dimensions(spec: &CarpetSpec, rho_hat: f64) -> Result<DimensionReport> {
    if !(rho_hat > 0.0 && rho_hat.is_finite()) {
        return Err(Error::input(format!("rho_hat must be positive, got {rho_hat}")));
    }
    let m = spec.mass() as f64;
    let l = spec.length_scale as f64;
    let t = m * rho_hat;
    Ok(DimensionReport {
        mass: m,
        length_scale: l,
        rho: rho_hat,
        time_scale: t,
        hausdorff: m.ln() / l.ln(),
        walk: t.ln() / l.ln(),
        spectral: 2.0 * m.ln() / t.ln(),
        transient: rho_hat < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> ResourceCaps {
        ResourceCaps::default()
    }

    #[test]
    fn level_counts_match_mass_powers() {
        let sc = CarpetSpec::sierpinski_carpet();
        let ms = CarpetSpec::menger_sponge();
        assert_eq!(cells_at_level(&sc, 0, &caps()).unwrap().len(), 1);
        assert_eq!(cells_at_level(&sc, 2, &caps()).unwrap().len(), 64);
        assert_eq!(cells_at_level(&ms, 1, &caps()).unwrap().len(), 20);
        assert_eq!(cells_at_level(&ms, 3, &caps()).unwrap().len(), 8000);
    }

    #[test]
    fn level_cells_sorted_and_retained() {
        let sc = CarpetSpec::sierpinski_carpet();
        let set = cells_at_level(&sc, 3, &caps()).unwrap();
        let v: Vec<Vec<i64>> = set.iter().map(|c| c.to_vec()).collect();
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(v, sorted);
        assert!(v.iter().all(|c| sc.is_retained(c, 3)));
        assert!(!sc.is_retained(&[4, 4], 2));
        assert!(!sc.is_retained(&[13, 13], 3));
    }

    #[test]
    fn memory_guard() {
        let sc = CarpetSpec::sierpinski_carpet();
        let tight = ResourceCaps { max_vertices: 100, ..caps() };
        assert!(matches!(cells_at_level(&sc, 3, &tight), Err(Error::Resource { .. })));
    }

    #[test]
    fn presets_validate() {
        assert!(validate_gsc(&CarpetSpec::sierpinski_carpet()).passed());
        assert!(validate_gsc_with(&CarpetSpec::menger_sponge(), true).passed());
        let cube = CarpetSpec::full_cube(3, 3).unwrap();
        let r = validate_gsc(&cube);
        assert!(r.passed() && r.calibration_mode);
    }

    #[test]
    fn full_cube_needs_flag() {
        let mut cells = Vec::new();
        for_each_in_box(2, 3, |c| cells.push(c.to_vec()));
        assert!(CarpetSpec::new(2, 3, cells, false).is_err());
    }

    #[test]
    fn four_corners_disconnected() {
        let spec =
            CarpetSpec::new(2, 3, vec![vec![0, 0], vec![0, 2], vec![2, 0], vec![2, 2]], false)
                .unwrap();
        let r = validate_gsc(&spec);
        assert!(!r.connectedness.passed());
        assert!(r.symmetry.passed());
    }

    #[test]
    fn diagonal_cross_fails_non_diagonality_and_borders() {
        let spec = CarpetSpec::new(
            2,
            3,
            vec![vec![0, 0], vec![2, 0], vec![0, 2], vec![2, 2], vec![1, 1]],
            false,
        )
        .unwrap();
        let r = validate_gsc(&spec);
        assert!(r.symmetry.passed());
        assert!(r.connectedness.passed());
        assert_eq!(
            r.non_diagonality,
            AxiomStatus::Fail { witness: Witness::DiagonalBlock { level: 1, origin: vec![0, 0] } }
        );
        assert!(!r.borders.passed());
        assert_eq!(r.failures(), vec!["GSC3", "GSC4"]);
    }

    #[test]
    fn asymmetric_pattern_has_isometry_witness() {
        let spec = CarpetSpec::new(
            2,
            3,
            vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![0, 1], vec![0, 2]],
            false,
        )
        .unwrap();
        match validate_gsc(&spec).symmetry {
            AxiomStatus::Fail { witness: Witness::Isometry { cell, image, .. } } => {
                assert!(spec.pattern_contains(&cell));
                assert!(!spec.pattern_contains(&image));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_coordinates_rejected() {
        assert!(CarpetSpec::new(2, 3, vec![vec![0, 3]], false).is_err());
        assert!(CarpetSpec::new(2, 3, vec![vec![0, 0], vec![0, 0]], false).is_err());
        assert!(CarpetSpec::new(2, 3, vec![vec![0]], false).is_err());
        assert!(CarpetSpec::new(1, 3, vec![vec![0]], false).is_err());
        assert!(CarpetSpec::new(2, 2, vec![vec![0, 0]], false).is_err());
    }

    #[test]
    fn partition_unit_scale_examples() {
        let sc = CarpetSpec::sierpinski_carpet();
        let p = half_open_partition(&sc, 0, 1).unwrap();
        let owner = |x: &[i64]| p.parts().cell(p.owner(x).unwrap()).to_vec();
        assert_eq!(owner(&[3, 0]), vec![2, 0]);
        assert_eq!(owner(&[3, 3]), vec![2, 2]);
        assert_eq!(owner(&[1, 1]), vec![0, 0]);
        assert_eq!(owner(&[2, 2]), vec![2, 2]);
        assert_eq!(owner(&[1, 2]), vec![1, 2]);
        assert_eq!(owner(&[2, 1]), vec![2, 1]);
        assert!(half_open_partition(&sc, 2, 1).is_err());
    }

    #[test]
    fn partition_part_count() {
        let sc = CarpetSpec::sierpinski_carpet();
        let p = half_open_partition(&sc, 1, 2).unwrap();
        assert_eq!(p.parts().len(), 8);
    }

    #[test]
    fn dimension_formulas() {
        let cube = CarpetSpec::full_cube(3, 3).unwrap();
        let r = dimensions(&cube, 1.0 / 3.0).unwrap();
        assert!((r.hausdorff - 3.0).abs() < 1e-12);
        assert!((r.walk - 2.0).abs() < 1e-12);
        assert!((r.spectral - 3.0).abs() < 1e-12);
        assert!(r.transient);
        let sc = dimensions(&CarpetSpec::sierpinski_carpet(), 1.25).unwrap();
        assert!((sc.hausdorff - 8f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(!sc.transient);
        assert!(dimensions(&cube, 0.0).is_err());
    }
}
