use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::emit::{sha256_hex, write_artifact};
use crate::error::Result;
use crate::geometry::CarpetSpec;

/// Digest of the canonical pattern text `d;l;allow;cells...`.
pub fn spec_hash(spec: &CarpetSpec) -> String {
    let mut s = format!("{};{};{}", spec.dimension(), spec.length_scale(), spec.allow_full_cube());
    for c in spec.cells() {
        s.push(';');
        s.push_str(&c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    }
    sha256_hex(s.as_bytes())
}

/// Inputs and outputs of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub spec_hash: String,
    pub command_line: Vec<String>,
    pub master_seed: u64,
    /// Seconds since the epoch; 0 in deterministic mode.
    pub timestamp: u64,
    pub deterministic: bool,
    pub task_seeds: BTreeMap<String, u64>,
    /// Output path to SHA-256 digest.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(spec: &CarpetSpec, command_line: Vec<String>, master_seed: u64, deterministic: bool) -> Self {
        let timestamp = if deterministic {
            0
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        };
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            spec_hash: spec_hash(spec),
            command_line,
            master_seed,
            timestamp,
            deterministic,
            task_seeds: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    /// Writes an artifact and records its digest.
    pub fn emit(&mut self, path: &Path, contents: &str) -> Result<String> {
        let d = write_artifact(path, contents)?;
        self.outputs.insert(path.display().to_string(), d.clone());
        Ok(d)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        write_artifact(path, &s)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_cell_order_and_tracks_content() {
        let sc = CarpetSpec::sierpinski_carpet();
        let mut cells = sc.cells().to_vec();
        cells.reverse();
        let same = CarpetSpec::new(2, 3, cells, false).unwrap();
        assert_eq!(spec_hash(&sc), spec_hash(&same));
        assert_ne!(spec_hash(&sc), spec_hash(&CarpetSpec::menger_sponge()));
    }

    #[test]
    fn records_digests() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(&CarpetSpec::sierpinski_carpet(), vec!["gsc".into()], 3, true);
        let p = dir.path().join("a.csv");
        let d = m.emit(&p, "x\n").unwrap();
        assert_eq!(m.outputs[&p.display().to_string()], d);
        m.write(&dir.path().join("manifest.json")).unwrap();
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
