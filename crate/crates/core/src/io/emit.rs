use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gff::{FieldSample, Provenance};
use crate::graphs::LatticeGraph;
use crate::studies::{ReportRow, StudyReport};

const REPORT_HEADER: &str = "study,spec,N,quantity,value,stderr,flags,seed,runtime_ms";

/// Real number with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn clean(field: &str) -> String {
    field.replace([',', '\n', '\r'], ";")
}

pub fn report_csv(report: &StudyReport) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            clean(&r.study),
            clean(&r.spec),
            r.level,
            clean(&r.quantity),
            format_real(r.value),
            format_real(r.stderr),
            clean(&r.flags),
            r.seed,
            r.runtime_ms
        );
    }
    out
}

pub fn read_report_csv(text: &str) -> Result<StudyReport> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(Error::input("report header mismatch"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::input(format!("malformed report row {}", i + 1));
        if f.len() != 9 {
            return Err(bad());
        }
        rows.push(ReportRow {
            study: f[0].into(),
            spec: f[1].into(),
            level: f[2].parse().map_err(|_| bad())?,
            quantity: f[3].into(),
            value: parse_real(f[4]).ok_or_else(bad)?,
            stderr: parse_real(f[5]).ok_or_else(bad)?,
            flags: f[6].into(),
            seed: f[7].parse().map_err(|_| bad())?,
            runtime_ms: f[8].parse().map_err(|_| bad())?,
        });
    }
    Ok(StudyReport { rows })
}

/// JSON array of rows; non-finite reals become `null`.
pub fn report_json(report: &StudyReport) -> String {
    let mut s = serde_json::to_string_pretty(&report.rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Generic CSV with a header line.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(|c| clean(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// `u v` per edge.
pub fn graph_edge_list(g: &LatticeGraph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// `id coord...` per vertex; inner and crosswire coordinates are doubled.
pub fn graph_vertex_table(g: &LatticeGraph) -> String {
    let mut out = String::new();
    for v in 0..g.len() {
        let _ = write!(out, "{v}");
        for c in g.coord(v) {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    out
}

/// One row per sample: index, provenance, seed, then the field values.
pub fn samples_csv(samples: &[FieldSample]) -> String {
    let width = samples.first().map_or(0, |s| s.values.len());
    let mut out = String::from("sample,provenance,seed");
    for i in 0..width {
        let _ = write!(out, ",v{i}");
    }
    out.push('\n');
    for (k, s) in samples.iter().enumerate() {
        let prov = match s.provenance {
            Provenance::Exact { index } => format!("exact:{index}"),
            Provenance::Gibbs { chain, step } => format!("gibbs:{chain}:{step}"),
        };
        let _ = write!(out, "{k},{prov},{}", s.seed);
        for v in &s.values {
            let _ = write!(out, ",{}", format_real(*v));
        }
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `contents` and returns its SHA-256 digest.
pub fn write_artifact(path: &Path, contents: &str) -> Result<String> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(sha256_hex(contents.as_bytes()))
}
