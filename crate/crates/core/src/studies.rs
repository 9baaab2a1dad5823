//! Finite-N surrogate experiments and their tabular reports.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResourceCaps};
use crate::geometry::{dimensions, CarpetSpec};
use crate::gff::{
    entropy_lower_bound, estimate_wall_probability, gibbs_hard_wall, relative_entropy, worker_rng,
    ChainConfig, ConditioningGrid, Observable, Tilt,
};
use crate::graphs::{
    build_inner_graph, build_outer_graph, coarse_sets, cubic_neighborhood, default_x0,
    mean_value_operator, project_to_inner, sample_at_centers, Center, LatticeGraph,
};
use crate::green::{
    dirichlet_energy, equilibrium_potential, green_form, quad_form_inverse_green,
    resistance_sequence, Boundary, DirichletOperator, SolverConfig,
};

/// Density used by the Green form study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    #[default]
    Constant,
    /// `h(y) = 1 + y_axis`.
    Coordinate(usize),
}

impl Density {
    fn eval(&self, y: &[f64]) -> f64 {
        match *self {
            Density::Constant => 1.0,
            Density::Coordinate(i) => 1.0 + y[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyPlan {
    /// Label written to the `spec` column.
    pub spec_id: String,
    /// Ambient margin: level-N quantities are killed on leaving `V_{N+pad}`.
    pub pad: u32,
    /// Crosswire levels `1..=rho_levels`; the last ratio is the resistance factor.
    pub rho_levels: u32,
    pub capacity_levels: Vec<u32>,
    pub green_form_levels: Vec<u32>,
    /// Quadrature depth below each level for the mean-value operator.
    pub green_form_refinement: u32,
    pub density: Density,
    /// Audit level; defaults to 2 in two dimensions and 1 above.
    pub audit_level: Option<u32>,
    pub audit_trials: usize,
    pub wall_levels: Vec<u32>,
    pub wall_pad: u32,
    pub wall_samples: usize,
    pub tilt: Tilt,
    /// Tilt constant; `2 * max G(x,x)` when absent.
    pub alpha: Option<f64>,
    pub height_levels: Vec<u32>,
    /// Killing level shared by all height runs; `N + pad` per level when absent.
    pub height_ambient: Option<u32>,
    pub centers: Vec<Vec<f64>>,
    pub eps: Vec<f64>,
    /// Coarse level of the conditioning grid.
    pub k: u32,
    pub x0: Option<Vec<i64>>,
    pub z: Option<Vec<i64>>,
    /// Level whose vertices give the Green diagonal range.
    pub diag_level: u32,
    pub seed: u64,
    pub chain: ChainConfig,
}

impl Default for StudyPlan {
    fn default() -> Self {
        StudyPlan {
            spec_id: "carpet".into(),
            pad: 2,
            rho_levels: 3,
            capacity_levels: vec![0, 1, 2, 3],
            green_form_levels: vec![1, 2, 3],
            green_form_refinement: 1,
            density: Density::Constant,
            audit_level: None,
            audit_trials: 1000,
            wall_levels: vec![0, 1, 2],
            wall_pad: 1,
            wall_samples: 20_000,
            tilt: Tilt::Equilibrium,
            alpha: None,
            height_levels: vec![1, 2, 3],
            height_ambient: None,
            centers: Vec::new(),
            eps: vec![0.25, 1.0],
            k: 1,
            x0: None,
            z: None,
            diag_level: 1,
            seed: 1,
            chain: ChainConfig {
                n_burnin: 300,
                n_steps: 600,
                thinning: 2,
                exterior_refresh: 25,
                ..ChainConfig::default()
            },
        }
    }
}

impl StudyPlan {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.pad < 1 {
            errs.push("study.pad must be at least 1".to_string());
        }
        if self.wall_pad < 1 {
            errs.push("study.wall_pad must be at least 1".to_string());
        }
        if self.rho_levels < 2 {
            errs.push("study.rho_levels must be at least 2".to_string());
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) {
            errs.push("study.eps values must be positive".to_string());
        }
        if self.wall_samples < 2 {
            errs.push("study.wall_samples must be at least 2".to_string());
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) {
                errs.push("study.alpha must be positive".to_string());
            }
        }
        if let Err(e) = self.chain.validate() {
            errs.push(format!("mcmc: {e}"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// One line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub study: String,
    pub spec: String,
    #[serde(rename = "N")]
    pub level: u32,
    pub quantity: String,
    pub value: f64,
    pub stderr: f64,
    pub flags: String,
    pub seed: u64,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<ReportRow>,
}

impl StudyReport {
    pub fn extend(&mut self, other: StudyReport) {
        self.rows.extend(other.rows);
    }

    /// Rows matching study, level and quantity.
    pub fn find(&self, study: &str, level: u32, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.study == study && r.level == level && r.quantity == quantity)
    }
}

/// Execution switches shared by all studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunMode {
    /// Serial execution and zero runtimes so that reports replay byte for byte.
    pub deterministic: bool,
}

struct RowSink<'a> {
    study: &'a str,
    spec: &'a str,
    seed: u64,
    mode: RunMode,
    start: Instant,
    rows: Vec<ReportRow>,
}

impl<'a> RowSink<'a> {
    fn new(study: &'a str, spec: &'a str, seed: u64, mode: RunMode) -> Self {
        RowSink { study, spec, seed, mode, start: Instant::now(), rows: Vec::new() }
    }

    fn push(&mut self, level: u32, quantity: &str, value: f64, stderr: f64, flags: &str) {
        let runtime_ms =
            if self.mode.deterministic { 0 } else { self.start.elapsed().as_millis() as u64 };
        self.rows.push(ReportRow {
            study: self.study.into(),
            spec: self.spec.into(),
            level,
            quantity: quantity.into(),
            value,
            stderr,
            flags: flags.into(),
            seed: self.seed,
            runtime_ms,
        });
    }

    /// Records a failed task as a flagged row, or propagates non-resource errors.
    fn fail(&mut self, level: u32, quantity: &str, err: Error) -> Result<()> {
        match err {
            Error::Resource { .. } => {
                self.push(level, quantity, f64::NAN, f64::NAN, "resource_cap");
                Ok(())
            }
            e => Err(e),
        }
    }

    fn finish(self) -> StudyReport {
        StudyReport { rows: self.rows }
    }
}

/// Seed of task `task` at level `level` derived from the master seed.
pub fn task_seed(master: u64, task: u64, level: u32) -> u64 {
    let mut z = master ^ task.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((level as u64) << 32);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Vertices of `graph` inside the box `[0, side]^d`: the level-N carpet seen
/// inside a deeper outer graph.
pub fn vertices_in_box(graph: &LatticeGraph, side: i64) -> Vec<usize> {
    (0..graph.len()).filter(|&v| graph.coord(v).iter().all(|&x| x <= side)).collect()
}

/// Outer graph of `V_{level + pad}` with its operator and the local ids of `V_level`.
pub fn padded_operator(
    spec: &CarpetSpec,
    level: u32,
    ambient: u32,
    solver: SolverConfig,
    caps: &ResourceCaps,
) -> Result<(LatticeGraph, DirichletOperator, Vec<usize>)> {
    if ambient < level {
        return Err(Error::input("ambient level below the target level"));
    }
    let g = build_outer_graph(spec, ambient, caps)?;
    let op = DirichletOperator::assemble(&g, None, solver, caps)?;
    let inner = vertices_in_box(&g, spec.side(level)?);
    Ok((g, op, inner))
}

/// Range of the Green diagonal over `V_level` killed outside `V_{level+pad}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalRange {
    pub min: f64,
    pub max: f64,
    /// Largest change of the diagonal between pads `pad - 1` and `pad` (NaN for pad 1).
    pub pad_increment: f64,
}

pub fn green_diagonal_range(
    spec: &CarpetSpec,
    level: u32,
    pad: u32,
    solver: SolverConfig,
    caps: &ResourceCaps,
) -> Result<DiagonalRange> {
    let diag = |p: u32| -> Result<Vec<(Vec<i64>, f64)>> {
        let (g, op, ids) = padded_operator(spec, level, level + p, solver, caps)?;
        let d = op.green_diagonal(&ids)?;
        Ok(ids.iter().zip(d).map(|(&i, v)| (g.coord(i).to_vec(), v)).collect())
    };
    let cur = diag(pad)?;
    let min = cur.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let max = cur.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let pad_increment = if pad >= 2 {
        let prev = diag(pad - 1)?;
        cur.iter().zip(&prev).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    Ok(DiagonalRange { min, max, pad_increment })
}

/// Crosswire resistances and the dimension summary for the estimated factor.
pub fn resistance_study(spec: &CarpetSpec, plan: &StudyPlan, mode: RunMode, caps: &ResourceCaps) -> Result<(f64, StudyReport)> {
    let mut sink = RowSink::new("resistance", &plan.spec_id, 0, mode);
    let seq = resistance_sequence(spec, plan.rho_levels, caps)?;
    for r in &seq {
        sink.push(r.level, "resistance", r.resistance, 0.0, "ok");
        if let Some(rho) = r.rho_hat {
            sink.push(r.level, "rho_hat", rho, 0.0, "ok");
        }
    }
    let rho = seq.last().and_then(|r| r.rho_hat).ok_or_else(|| Error::input("no resistance ratio"))?;
    let dims = dimensions(spec, rho)?;
    let top = plan.rho_levels;
    sink.push(top, "hausdorff_dimension", dims.hausdorff, 0.0, "ok");
    sink.push(top, "walk_dimension", dims.walk, 0.0, "ok");
    sink.push(top, "spectral_dimension", dims.spectral, 0.0, "ok");
    sink.push(top, "time_scale", dims.time_scale, 0.0, if dims.transient { "transient" } else { "recurrent" });
    Ok((rho, sink.finish()))
}

/// `rho^N <1, (G_box)^{-1} 1>` by Schur complement and `rho^N Cap(V_N)` by the
/// equilibrium potential, with their ratio.
pub fn capacity_sequence(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    rho_hat: f64,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
) -> Result<StudyReport> {
    let mut sink = RowSink::new("capacity", &plan.spec_id, 0, mode);
    for &n in &plan.capacity_levels {
        let res = (|| -> Result<(f64, f64)> {
            let (_, op, s) = padded_operator(spec, n, n + plan.pad, solver, caps)?;
            let ones = vec![1.0; s.len()];
            let a = quad_form_inverse_green(&op, &s, &ones, caps)?;
            let b = equilibrium_potential(&op, &s, caps)?.capacity;
            Ok((a, b))
        })();
        match res {
            Ok((a, b)) => {
                let scale = rho_hat.powi(n as i32);
                sink.push(n, "value_a", scale * a, 0.0, "ok");
                sink.push(n, "value_b", scale * b, 0.0, "ok");
                sink.push(n, "ratio", a / b, 0.0, "ok");
            }
            Err(e) => sink.fail(n, "value_a", e)?,
        }
    }
    Ok(sink.finish())
}

/// `rho^{-N} m^{-2N} (P h)^T G_{I_N} (P h)` with successive ratios.
pub fn green_form_convergence(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    rho_hat: f64,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
) -> Result<StudyReport> {
    let mut sink = RowSink::new("green_form", &plan.spec_id, 0, mode);
    let mut prev: Option<f64> = None;
    for &n in &plan.green_form_levels {
        let res = (|| -> Result<f64> {
            let fine = n + plan.green_form_refinement;
            let (_, h) = sample_at_centers(spec, fine, |y| plan.density.eval(y))?;
            let ph = mean_value_operator(spec, n, fine, &h)?;
            let g = build_inner_graph(spec, n, caps)?;
            let op = DirichletOperator::assemble(&g, None, solver, caps)?;
            let norm = (spec.mass() as f64).powi(n as i32);
            green_form(&op, &ph, rho_hat, n, norm)
        })();
        match res {
            Ok(v) => {
                sink.push(n, "g_N", v, 0.0, "ok");
                if let Some(p) = prev {
                    let r = v / p;
                    let flag = if (0.125..=8.0).contains(&r) { "ok" } else { "gate_fail" };
                    sink.push(n, "ratio", r, 0.0, flag);
                }
                prev = Some(v);
            }
            Err(e) => {
                sink.fail(n, "g_N", e)?;
                prev = None;
            }
        }
    }
    Ok(sink.finish())
}

/// Outcome of the randomized comparison between the outer and inner forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditOutcome {
    pub trials: usize,
    pub energy_violations: usize,
    /// Smallest `E_G(f) - E_I(Qf)` seen.
    pub energy_worst_slack: f64,
    pub free_energy_violations: usize,
    pub green_violations: usize,
    /// Smallest `2^{2d} (Qf)^T G_I (Qf) / f^T G_G f` seen.
    pub green_worst_ratio: f64,
}

/// Energy and Green-form inequalities on `trials` random functions.
pub fn comparison_audit_trials(
    spec: &CarpetSpec,
    level: u32,
    trials: usize,
    seed: u64,
    solver: SolverConfig,
    caps: &ResourceCaps,
) -> Result<AuditOutcome> {
    let d = spec.dimension();
    let outer_n = build_outer_graph(spec, level, caps)?;
    let inner_n = build_inner_graph(spec, level, caps)?;
    let outer_up = build_outer_graph(spec, level + 1, caps)?;
    let inner_up = build_inner_graph(spec, level + 1, caps)?;
    let embed: Vec<usize> = (0..outer_n.len())
        .map(|v| outer_up.index_of(outer_n.coord(v)).ok_or_else(|| Error::Structural("nesting".into())))
        .collect::<Result<_>>()?;
    let op_g = DirichletOperator::assemble(&outer_n, None, solver, caps)?;
    let op_i = DirichletOperator::assemble(&inner_n, None, solver, caps)?;
    let factor = (1u64 << (2 * d)) as f64;
    let mut rng = worker_rng(seed, 0);
    let mut out = AuditOutcome {
        trials,
        energy_violations: 0,
        energy_worst_slack: f64::INFINITY,
        free_energy_violations: 0,
        green_violations: 0,
        green_worst_ratio: f64::INFINITY,
    };
    let tol = 1e-10;
    for _ in 0..trials {
        let f: Vec<f64> = (0..outer_n.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        // infinite-graph energies: f vanishes off V_N, so one level up is exact
        let lhs = dirichlet_energy(&outer_n, &f, None, Boundary::Killed)?;
        let mut f_up = vec![0.0; outer_up.len()];
        for (v, &u) in embed.iter().enumerate() {
            f_up[u] = f[v];
        }
        let qf_up = project_to_inner(&outer_up, &inner_up, &f_up)?;
        let rhs = dirichlet_energy(&inner_up, &qf_up, None, Boundary::Killed)?;
        if lhs < rhs - tol * lhs.abs().max(1.0) {
            out.energy_violations += 1;
        }
        out.energy_worst_slack = out.energy_worst_slack.min(lhs - rhs);
        let qf = project_to_inner(&outer_n, &inner_n, &f)?;
        let free_l = dirichlet_energy(&outer_n, &f, None, Boundary::Free)?;
        let free_r = dirichlet_energy(&inner_n, &qf, None, Boundary::Free)?;
        if free_l < free_r - tol * free_l.abs().max(1.0) {
            out.free_energy_violations += 1;
        }
        let fp: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let qfp = project_to_inner(&outer_n, &inner_n, &fp)?;
        let gl: f64 = fp.iter().zip(op_g.solve(&fp)?).map(|(a, b)| a * b).sum();
        let gr: f64 = factor * qfp.iter().zip(op_i.solve(&qfp)?).map(|(a, b)| a * b).sum::<f64>();
        if gl > gr * (1.0 + tol) {
            out.green_violations += 1;
        }
        out.green_worst_ratio = out.green_worst_ratio.min(gr / gl);
    }
    Ok(out)
}

pub fn comparison_audit(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
) -> Result<StudyReport> {
    let level = plan.audit_level.unwrap_or(if spec.dimension() == 2 { 2 } else { 1 });
    let seed = task_seed(plan.seed, 4, level);
    let mut sink = RowSink::new("comparison_audit", &plan.spec_id, seed, mode);
    let o = comparison_audit_trials(spec, level, plan.audit_trials, seed, solver, caps)?;
    let flag = |v: usize| if v == 0 { "ok" } else { "violation" };
    sink.push(level, "trials", o.trials as f64, 0.0, "ok");
    sink.push(level, "energy_violations", o.energy_violations as f64, 0.0, flag(o.energy_violations));
    sink.push(level, "energy_worst_slack", o.energy_worst_slack, 0.0, "ok");
    sink.push(level, "free_energy_violations", o.free_energy_violations as f64, 0.0, flag(o.free_energy_violations));
    sink.push(level, "green_violations", o.green_violations as f64, 0.0, flag(o.green_violations));
    sink.push(level, "green_worst_ratio", o.green_worst_ratio, 0.0, "ok");
    Ok(sink.finish())
}

/// Tilt level `sqrt(alpha N log t)`.
pub fn default_shift(alpha: f64, level: u32, time_scale: f64) -> f64 {
    (alpha * level as f64 * time_scale.ln()).max(0.0).sqrt()
}

/// Tilted estimates of `log P(phi >= 0 on V_N)` against the entropy bound.
#[allow(clippy::too_many_arguments)]
pub fn wall_probability_scaling(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    rho_hat: f64,
    alpha: f64,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
) -> Result<StudyReport> {
    let t = spec.mass() as f64 * rho_hat;
    let mut rows = StudyReport::default();
    for &n in &plan.wall_levels {
        let seed = task_seed(plan.seed, 5, n);
        let mut sink = RowSink::new("wall_probability", &plan.spec_id, seed, mode);
        let res = (|| -> Result<()> {
            let (_, op, w) = padded_operator(spec, n, n + plan.wall_pad, solver, caps)?;
            let a = default_shift(alpha, n, t);
            let est = estimate_wall_probability(&op, &w, a, plan.tilt, plan.wall_samples, seed, caps)?;
            let usable = !est.no_hit && est.hits >= 10;
            let flag = if est.no_hit { "no_hit" } else if usable { "ok" } else { "unusable" };
            sink.push(n, "shift", a, 0.0, "ok");
            sink.push(n, "log_p_hat", est.log_p_hat, est.log_stderr, flag);
            if n >= 1 {
                let norm = rho_hat.powi(-(n as i32)) * n as f64 * t.ln();
                sink.push(n, "rate", est.log_p_hat / norm, est.log_stderr / norm, flag);
            }
            let ent = relative_entropy(&op, &w, a, caps)?;
            let bound = entropy_lower_bound(&est, ent);
            sink.push(n, "relative_entropy", ent, 0.0, "ok");
            sink.push(n, "entropy_lower_bound", bound.log_lower, bound.stderr, flag);
            if n == 0 {
                // rejection against a tilted run at the level-1 shift
                let rej = estimate_wall_probability(&op, &w, 0.0, plan.tilt, plan.wall_samples, seed ^ 1, caps)?;
                let a1 = default_shift(alpha, 1, t);
                let til = estimate_wall_probability(&op, &w, a1, plan.tilt, plan.wall_samples, seed ^ 2, caps)?;
                let z = (rej.p_hat - til.p_hat) / (rej.stderr.powi(2) + til.stderr.powi(2)).sqrt();
                let f = if z.abs() <= 3.0 { "ok" } else { "mismatch" };
                sink.push(n, "p_hat_rejection", rej.p_hat, rej.stderr, "ok");
                sink.push(n, "p_hat_tilted", til.p_hat, til.stderr, f);
            }
            Ok(())
        })();
        if let Err(e) = res {
            sink.fail(n, "log_p_hat", e)?;
        }
        rows.extend(sink.finish());
    }
    Ok(rows)
}

/// Hard-wall heights on `V_N` with the Green diagonal reference.
#[allow(clippy::too_many_arguments)]
pub fn height_scaling(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    rho_hat: f64,
    diag: DiagonalRange,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
) -> Result<StudyReport> {
    let t = spec.mass() as f64 * rho_hat;
    let reference = (2.0 * diag.min).sqrt();
    let mut rows = StudyReport::default();
    for &n in &plan.height_levels {
        let seed = task_seed(plan.seed, 6, n);
        let mut sink = RowSink::new("height", &plan.spec_id, seed, mode);
        let alpha = plan.alpha.unwrap_or(2.0 * diag.max);
        let res = height_level(spec, plan, n, seed, t, reference, alpha, solver, mode, caps, &mut sink);
        if let Err(e) = res {
            sink.fail(n, "mean_height", e)?;
        }
        rows.extend(sink.finish());
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn height_level(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    n: u32,
    seed: u64,
    t: f64,
    reference: f64,
    alpha: f64,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
    sink: &mut RowSink,
) -> Result<()> {
    let ambient = plan.height_ambient.unwrap_or(n + plan.pad);
    if ambient <= n {
        return Err(Error::input("height ambient level must exceed N"));
    }
    let (g, op, wall) = padded_operator(spec, n, ambient, solver, caps)?;
    let sub = build_outer_graph(spec, n, caps)?;
    let to_op = |v: usize| op.local_index(g.index_of(sub.coord(v)).unwrap()).unwrap();
    let mut observables = vec![Observable { name: "mean".into(), vertices: wall.clone() }];
    let centers: Vec<Vec<f64>> = if plan.centers.is_empty() {
        vec![vec![0.5; spec.dimension()]]
    } else {
        plan.centers.clone()
    };
    for (ci, c) in centers.iter().enumerate() {
        for &eps in &plan.eps {
            let nb = cubic_neighborhood(spec, &sub, &Center::Point(c.clone()), eps)?;
            if nb.is_empty() {
                continue;
            }
            observables.push(Observable {
                name: format!("phi_bar_c{ci}_eps{eps}"),
                vertices: nb.into_iter().map(to_op).collect(),
            });
        }
    }
    let mut chain = plan.chain.clone();
    chain.seed = seed;
    let run = gibbs_hard_wall(&op, &wall, &chain, &observables, false, mode.deterministic, caps)?;
    let scale = (n as f64 * t.ln()).sqrt();
    for s in &run.stats.observables {
        let converged = s.r_hat.is_none_or(|r| r < 1.1);
        let flag = if converged { "ok" } else { "r_hat" };
        let name = if s.name == "mean" { "mean_height".to_string() } else { s.name.clone() };
        sink.push(n, &name, s.mean, s.stderr, flag);
        if n >= 1 {
            sink.push(n, &format!("{name}_normalized"), s.mean / scale, s.stderr / scale, flag);
        }
        if let Some(r) = s.r_hat {
            sink.push(n, &format!("{name}_r_hat"), r, 0.0, "ok");
        }
    }
    sink.push(n, "reference_sqrt_2g", reference, 0.0, "ok");
    sink.push(n, "min_wall_value", run.stats.min_wall_value, 0.0, if run.stats.min_wall_value >= 0.0 { "ok" } else { "violation" });
    if n > plan.k {
        theta_rows(spec, plan, n, &g, &sub, &op, &run.finals, &wall, alpha * t.ln(), caps, sink)?;
    }
    Ok(())
}

/// Empirical measure of the rip points and the counts for the field and the
/// conditional mean, from the final state of each chain.
#[allow(clippy::too_many_arguments)]
fn theta_rows(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    n: u32,
    g: &LatticeGraph,
    sub: &LatticeGraph,
    op: &DirichletOperator,
    finals: &[Vec<f64>],
    wall: &[usize],
    alpha_t: f64,
    caps: &ResourceCaps,
    sink: &mut RowSink,
) -> Result<()> {
    let x0 = match &plan.x0 {
        Some(x) => x.clone(),
        None => default_x0(spec, plan.k)?,
    };
    let z = plan.z.clone().unwrap_or_else(|| vec![0; spec.dimension()]);
    let cs = coarse_sets(spec, sub, plan.k, &x0, &z)?;
    let map = |v: usize| op.local_index(g.index_of(sub.coord(v)).unwrap()).unwrap();
    let rips: Vec<usize> = cs.rip.iter().map(|&v| map(v)).collect();
    // the exterior of V_N is conditioned on as well, else the rips connect around it
    let mut in_wall = vec![false; op.len()];
    for &w in wall {
        in_wall[w] = true;
    }
    let mut grid: Vec<usize> = cs.grid.iter().map(|&v| map(v)).collect();
    grid.extend((0..op.len()).filter(|&i| !in_wall[i]));
    let cond = ConditioningGrid::new(op, &grid, &rips, caps)?;
    let threshold = (alpha_t * n as f64).sqrt();
    let (mut frac, mut th_phi, mut th_mu) = (0.0, 0.0, 0.0);
    for phi in finals {
        let dec = cond.decompose(op, phi)?;
        let below = rips.iter().filter(|&&r| phi[r] <= threshold).count() as f64;
        frac += below / rips.len() as f64;
        th_phi += below;
        th_mu += dec.rip_mean.iter().filter(|&&m| m <= threshold).count() as f64;
    }
    let k = finals.len() as f64;
    sink.push(n, "rip_points", rips.len() as f64, 0.0, "ok");
    sink.push(n, "empirical_measure_below", frac / k, 0.0, "final_state");
    sink.push(n, "theta_phi", th_phi / k, 0.0, "final_state");
    sink.push(n, "theta_mu", th_mu / k, 0.0, "final_state");
    let v = cond.rip_variances();
    sink.push(n, "rip_variance_min", v.iter().copied().fold(f64::INFINITY, f64::min), 0.0, "ok");
    Ok(())
}

/// Every study in sequence (or fanned out when not deterministic).
pub fn run_studies(
    spec: &CarpetSpec,
    plan: &StudyPlan,
    solver: SolverConfig,
    mode: RunMode,
    caps: &ResourceCaps,
) -> Result<StudyReport> {
    plan.validate()?;
    let (rho, mut report) = resistance_study(spec, plan, mode, caps)?;
    let diag = green_diagonal_range(spec, plan.diag_level, plan.pad, solver, caps)?;
    let alpha = plan.alpha.unwrap_or(2.0 * diag.max);
    {
        let mut sink = RowSink::new("green_diagonal", &plan.spec_id, 0, mode);
        sink.push(plan.diag_level, "g_min", diag.min, diag.pad_increment, "ok");
        sink.push(plan.diag_level, "g_max", diag.max, diag.pad_increment, "ok");
        sink.push(plan.diag_level, "alpha", alpha, 0.0, "ok");
        report.extend(sink.finish());
    }
    type Task<'a> = Box<dyn Fn() -> Result<StudyReport> + Send + Sync + 'a>;
    let tasks: Vec<Task> = vec![
        Box::new(|| capacity_sequence(spec, plan, rho, solver, mode, caps)),
        Box::new(|| green_form_convergence(spec, plan, rho, solver, mode, caps)),
        Box::new(|| comparison_audit(spec, plan, solver, mode, caps)),
        Box::new(|| wall_probability_scaling(spec, plan, rho, alpha, solver, mode, caps)),
        Box::new(|| height_scaling(spec, plan, rho, diag, solver, mode, caps)),
    ];
    let parts: Vec<StudyReport> = if mode.deterministic {
        tasks.iter().map(|t| t()).collect::<Result<_>>()?
    } else {
        tasks.par_iter().map(|t| t()).collect::<Result<_>>()?
    };
    for p in parts {
        report.extend(p);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> ResourceCaps {
        ResourceCaps::default()
    }

    #[test]
    fn capacity_ratio_is_one() {
        let sc = CarpetSpec::sierpinski_carpet();
        let plan = StudyPlan { capacity_levels: vec![0, 1, 2], ..Default::default() };
        let r = capacity_sequence(&sc, &plan, 1.25, SolverConfig::default(), RunMode { deterministic: true }, &caps()).unwrap();
        for n in 0..=2 {
            let ratio = r.find("capacity", n, "ratio").unwrap().value;
            assert!((ratio - 1.0).abs() < 1e-8);
            assert!(r.find("capacity", n, "value_a").unwrap().value > 0.0);
        }
    }

    #[test]
    fn green_form_scales_quadratically() {
        let sc = CarpetSpec::sierpinski_carpet();
        let plan = StudyPlan { green_form_levels: vec![1, 2], ..Default::default() };
        let one = green_form_convergence(&sc, &plan, 1.25, SolverConfig::default(), RunMode::default(), &caps()).unwrap();
        let g1 = one.find("green_form", 1, "g_N").unwrap().value;
        assert!(g1 > 0.0);
        let r = one.find("green_form", 2, "ratio").unwrap();
        assert_eq!(r.flags, "ok");
    }

    #[test]
    fn audit_constant_function_has_zero_free_energy() {
        let sc = CarpetSpec::sierpinski_carpet();
        let o = comparison_audit_trials(&sc, 1, 20, 3, SolverConfig::default(), &caps()).unwrap();
        assert_eq!(o.energy_violations + o.green_violations + o.free_energy_violations, 0);
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(1, 0, 0), task_seed(1, 0, 1));
        assert_ne!(task_seed(1, 0, 0), task_seed(2, 0, 0));
        assert_eq!(task_seed(7, 3, 2), task_seed(7, 3, 2));
    }
}
