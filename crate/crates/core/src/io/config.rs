use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result, ResourceCaps};
use crate::geometry::{CarpetSpec, MAX_DIM};
use crate::gff::ChainConfig;
use crate::green::{SolverChoice, SolverConfig};
use crate::studies::StudyPlan;

/// `[solver]` section: ambient pad, linear solver and size caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub pad: u32,
    pub method: SolverChoice,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub max_vertices: Option<u64>,
    pub max_unknowns: Option<u64>,
    pub max_factor_nnz: Option<u64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            pad: 2,
            method: s.choice,
            cg_tol: s.cg_tol,
            cg_max_iter: s.cg_max_iter,
            max_vertices: None,
            max_unknowns: None,
            max_factor_nnz: None,
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { choice: self.method, cg_tol: self.cg_tol, cg_max_iter: self.cg_max_iter }
    }

    /// Caps from the file, then overridden by the environment.
    pub fn caps(&self) -> ResourceCaps {
        let mut c = ResourceCaps::default();
        if let Some(v) = self.max_vertices {
            c.max_vertices = v;
        }
        if let Some(v) = self.max_unknowns {
            c.max_unknowns = v;
        }
        if let Some(v) = self.max_factor_nnz {
            c.max_factor_nnz = v;
        }
        let env = ResourceCaps::from_env();
        let def = ResourceCaps::default();
        if env.max_vertices != def.max_vertices {
            c.max_vertices = env.max_vertices;
        }
        if env.max_unknowns != def.max_unknowns {
            c.max_unknowns = env.max_unknowns;
        }
        if env.max_factor_nnz != def.max_factor_nnz {
            c.max_factor_nnz = env.max_factor_nnz;
        }
        c
    }
}

/// Parsed and range-checked configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub spec_id: String,
    pub carpet: CarpetSpec,
    pub solver: SolverSection,
    pub chain: ChainConfig,
    /// Study parameters with `pad` and `chain` filled from the other sections.
    pub plan: StudyPlan,
}

pub fn parse_config(path: &Path) -> Result<ConfigDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    parse_config_str(&text)
}

/// Line of `key` inside `[section]`, for error messages.
fn line_of(src: &str, section: &str, key: &str) -> Option<usize> {
    let key = key.split('[').next().unwrap_or(key);
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if section == current && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Errors<'a> {
    src: &'a str,
    list: Vec<String>,
}

impl Errors<'_> {
    fn push(&mut self, section: &str, key: &str, msg: impl std::fmt::Display) {
        let path = if key.is_empty() { section.to_string() } else { format!("{section}.{key}") };
        let path = path.trim_start_matches('.').to_string();
        match line_of(self.src, section, key) {
            Some(l) => self.list.push(format!("line {l}: {path}: {msg}")),
            None => self.list.push(format!("{path}: {msg}")),
        }
    }
}

/// Deserializes `table` into `T` one key at a time so that every bad key is
/// reported, then as a whole.
fn section<T: DeserializeOwned + Default>(
    table: Option<&Table>,
    name: &str,
    reserved: &[&str],
    errs: &mut Errors,
) -> T {
    let Some(table) = table else { return T::default() };
    let mut ok = Table::new();
    for (k, v) in table {
        if reserved.contains(&k.as_str()) {
            errs.push(name, k, "not allowed in this section");
            continue;
        }
        let mut one = Table::new();
        one.insert(k.clone(), v.clone());
        match Value::Table(one).try_into::<T>() {
            Ok(_) => {
                ok.insert(k.clone(), v.clone());
            }
            Err(e) => errs.push(name, k, e.to_string().trim()),
        }
    }
    Value::Table(ok).try_into::<T>().unwrap_or_default()
}

fn as_int(v: &Value) -> Option<i64> {
    v.as_integer()
}

/// Carpet keys at the top level of `table`, with field names prefixed by `prefix`.
fn carpet_from_table(table: &Table, section_name: &str, errs: &mut Errors) -> Option<(String, CarpetSpec)> {
    const KEYS: [&str; 6] = ["preset", "id", "dimension", "length_scale", "cells", "allow_full_cube"];
    for k in table.keys() {
        if !KEYS.contains(&k.as_str()) {
            errs.push(section_name, k, "unknown field");
        }
    }
    let before = errs.list.len();
    let id = match table.get("id") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            errs.push(section_name, "id", "expected a string");
            None
        }
        None => None,
    };
    let int_field = |k: &str, errs: &mut Errors| -> Option<i64> {
        match table.get(k) {
            None => None,
            Some(v) => match as_int(v) {
                Some(i) => Some(i),
                None => {
                    errs.push(section_name, k, "expected an integer");
                    None
                }
            },
        }
    };
    let dimension = int_field("dimension", errs);
    let length_scale = int_field("length_scale", errs);
    let allow = match table.get("allow_full_cube") {
        None => false,
        Some(Value::Boolean(b)) => *b,
        Some(_) => {
            errs.push(section_name, "allow_full_cube", "expected a boolean");
            false
        }
    };
    if let Some(d) = dimension {
        if !(2..=MAX_DIM as i64).contains(&d) {
            errs.push(section_name, "dimension", format!("must be in 2..={MAX_DIM}, got {d}"));
        }
    }
    if let Some(l) = length_scale {
        if l < 3 {
            errs.push(section_name, "length_scale", format!("must be at least 3, got {l}"));
        }
    }
    if let Some(p) = table.get("preset") {
        let Some(p) = p.as_str() else {
            errs.push(section_name, "preset", "expected a string");
            return None;
        };
        if table.contains_key("cells") {
            errs.push(section_name, "cells", "cannot be combined with preset");
        }
        let spec = match p {
            "sierpinski_carpet" => Ok(CarpetSpec::sierpinski_carpet()),
            "menger_sponge" => Ok(CarpetSpec::menger_sponge()),
            "full_cube" => {
                CarpetSpec::full_cube(dimension.unwrap_or(3) as usize, length_scale.unwrap_or(3))
            }
            other => {
                errs.push(
                    section_name,
                    "preset",
                    format!("unknown preset {other:?} (sierpinski_carpet, menger_sponge, full_cube)"),
                );
                return None;
            }
        };
        if p != "full_cube" && (dimension.is_some() || length_scale.is_some()) {
            errs.push(section_name, "preset", "dimension and length_scale are fixed by the preset");
        }
        return match spec {
            Ok(s) if errs.list.len() == before => Some((id.unwrap_or_else(|| p.to_string()), s)),
            Ok(_) => None,
            Err(e) => {
                errs.push(section_name, "preset", e);
                None
            }
        };
    }
    let (Some(d), Some(l)) = (dimension, length_scale) else {
        if dimension.is_none() {
            errs.push(section_name, "dimension", "missing");
        }
        if length_scale.is_none() {
            errs.push(section_name, "length_scale", "missing");
        }
        return None;
    };
    let Some(cells_v) = table.get("cells") else {
        errs.push(section_name, "cells", "missing");
        return None;
    };
    let Some(arr) = cells_v.as_array() else {
        errs.push(section_name, "cells", "expected a list of integer tuples");
        return None;
    };
    let mut cells = Vec::with_capacity(arr.len());
    let mut seen = std::collections::HashSet::new();
    for (i, c) in arr.iter().enumerate() {
        let field = format!("cells[{i}]");
        let Some(tuple) = c.as_array() else {
            errs.push(section_name, &field, "expected a list of integers");
            continue;
        };
        if tuple.len() as i64 != d {
            errs.push(section_name, &field, format!("has {} coordinates, expected {d}", tuple.len()));
            continue;
        }
        let mut cell = Vec::with_capacity(tuple.len());
        for (j, x) in tuple.iter().enumerate() {
            match as_int(x) {
                Some(v) if (0..l).contains(&v) => cell.push(v),
                Some(v) => errs.push(
                    section_name,
                    &format!("{field}[{j}]"),
                    format!("coordinate {v} out of range 0..={}", l - 1),
                ),
                None => errs.push(section_name, &format!("{field}[{j}]"), "expected an integer"),
            }
        }
        if cell.len() == tuple.len() && !seen.insert(cell.clone()) {
            errs.push(section_name, &field, format!("duplicate cell {cell:?}"));
        }
        cells.push(cell);
    }
    if errs.list.len() != before {
        return None;
    }
    match CarpetSpec::new(d as usize, l, cells, allow) {
        Ok(s) => Some((id.unwrap_or_else(|| "custom".into()), s)),
        Err(e) => {
            errs.push(section_name, "", e);
            None
        }
    }
}

/// Standalone carpet spec document: the `[carpet]` keys at top level.
pub fn parse_carpet_spec(text: &str) -> Result<(String, CarpetSpec)> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut errs = Errors { src: text, list: Vec::new() };
    let out = carpet_from_table(&table, "", &mut errs);
    match out {
        Some(s) if errs.list.is_empty() => Ok(s),
        _ => Err(Error::Config(errs.list)),
    }
}

pub fn parse_config_str(text: &str) -> Result<ConfigDocument> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut errs = Errors { src: text, list: Vec::new() };
    for (k, v) in &table {
        match k.as_str() {
            "carpet" | "solver" | "mcmc" | "study" => {
                if !v.is_table() {
                    errs.push("", k, "expected a table");
                }
            }
            _ => errs.push("", k, "unknown section"),
        }
    }
    let sub = |k: &str| table.get(k).and_then(Value::as_table);
    let carpet = match sub("carpet") {
        Some(t) => carpet_from_table(t, "carpet", &mut errs),
        None => {
            errs.push("carpet", "", "missing section");
            None
        }
    };
    let solver: SolverSection = section(sub("solver"), "solver", &[], &mut errs);
    let chain: ChainConfig = section(sub("mcmc"), "mcmc", &[], &mut errs);
    let mut plan: StudyPlan = section(sub("study"), "study", &["pad", "chain"], &mut errs);

    if solver.pad < 1 {
        errs.push("solver", "pad", "must be at least 1");
    }
    if !(solver.cg_tol > 0.0 && solver.cg_tol < 1.0) {
        errs.push("solver", "cg_tol", "must lie in (0, 1)");
    }
    if solver.cg_max_iter == 0 {
        errs.push("solver", "cg_max_iter", "must be positive");
    }
    for (k, v) in [
        ("max_vertices", solver.max_vertices),
        ("max_unknowns", solver.max_unknowns),
        ("max_factor_nnz", solver.max_factor_nnz),
    ] {
        if v == Some(0) {
            errs.push("solver", k, "must be positive");
        }
    }
    for (k, bad) in [
        ("n_steps", chain.n_steps == 0),
        ("thinning", chain.thinning == 0),
        ("chains", chain.chains == 0),
    ] {
        if bad {
            errs.push("mcmc", k, "must be positive");
        }
    }
    plan.pad = solver.pad;
    plan.chain = chain.clone();
    if let Err(Error::Config(list)) = plan.validate() {
        for m in list {
            if !m.starts_with("mcmc") && !m.starts_with("study.pad") {
                errs.list.push(m);
            }
        }
    }
    if let Some((_, spec)) = &carpet {
        let d = spec.dimension();
        for (i, c) in plan.centers.iter().enumerate() {
            if c.len() != d || c.iter().any(|x| !(0.0..=1.0).contains(x)) {
                errs.push("study", "centers", format!("center #{i} must be a point of [0,1]^{d}"));
            }
        }
        for (name, v) in [("x0", &plan.x0), ("z", &plan.z)] {
            if let Some(v) = v {
                if v.len() != d {
                    errs.push("study", name, format!("expected {d} coordinates"));
                }
            }
        }
        if let crate::studies::Density::Coordinate(a) = plan.density {
            if a >= d {
                errs.push("study", "density", format!("axis {a} out of range"));
            }
        }
    }
    match carpet {
        Some((id, spec)) if errs.list.is_empty() => {
            if !table.get("study").and_then(Value::as_table).is_some_and(|t| t.contains_key("spec_id")) {
                plan.spec_id = id.clone();
            }
            Ok(ConfigDocument { spec_id: plan.spec_id.clone(), carpet: spec, solver, chain, plan })
        }
        _ => Err(Error::Config(errs.list)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SC: &str = "[carpet]\ndimension = 2\nlength_scale = 3\ncells = [[0,0],[0,1],[0,2],[1,0],[1,2],[2,0],[2,1],[2,2]]\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let doc = parse_config_str(SC).unwrap();
        assert_eq!(doc.carpet, CarpetSpec::sierpinski_carpet());
        assert_eq!(doc.solver, SolverSection::default());
        assert_eq!(doc.chain, ChainConfig::default());
        assert_eq!(doc.plan.pad, 2);
        assert_eq!(doc.spec_id, "custom");
    }

    #[test]
    fn out_of_range_coordinate_names_field() {
        let bad = SC.replace("[2,2]]", "[2,3]]");
        let Err(Error::Config(list)) = parse_config_str(&bad) else { panic!() };
        assert!(list.iter().any(|m| m.contains("carpet.cells[7][1]") && m.contains("out of range")), "{list:?}");
        assert!(list[0].starts_with("line 4"));
    }

    #[test]
    fn duplicate_cell_rejected() {
        let bad = SC.replace("[2,2]]", "[2,2],[0,0]]");
        let Err(Error::Config(list)) = parse_config_str(&bad) else { panic!() };
        assert!(list.iter().any(|m| m.contains("duplicate")));
    }

    #[test]
    fn collects_every_error() {
        let bad = format!("{SC}[solver]\npad = 0\nbogus = 1\n[mcmc]\nchains = 0\nn_steps = \"x\"\n[extra]\n");
        let Err(Error::Config(list)) = parse_config_str(&bad) else { panic!() };
        assert!(list.len() >= 4, "{list:?}");
        for needle in ["solver.pad", "solver.bogus", "mcmc.chains", "mcmc.n_steps", "extra"] {
            assert!(list.iter().any(|m| m.contains(needle)), "missing {needle}: {list:?}");
        }
    }

    #[test]
    fn presets_and_spec_file() {
        let doc = parse_config_str("[carpet]\npreset = \"menger_sponge\"\n[study]\nseed = 9\n").unwrap();
        assert_eq!(doc.carpet, CarpetSpec::menger_sponge());
        assert_eq!(doc.plan.seed, 9);
        assert_eq!(doc.spec_id, "menger_sponge");
        let (_, s) = parse_carpet_spec("preset = \"full_cube\"\ndimension = 3\n").unwrap();
        assert!(s.is_full_cube());
        assert!(parse_carpet_spec("preset = \"menger_sponge\"\ndimension = 2\n").is_err());
    }
}
