//! Configuration documents, artifact emission and run manifests.

mod config;
mod emit;
mod manifest;

pub use config::{parse_carpet_spec, parse_config, parse_config_str, ConfigDocument, SolverSection};
pub use emit::{
    format_real, graph_edge_list, graph_vertex_table, read_report_csv, report_csv, report_json,
    samples_csv, sha256_hex, table_csv, write_artifact,
};
pub use manifest::{spec_hash, RunManifest};
