//! Run manifests: what was computed, from which config, to what accuracy.

use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::scenarios::{Outcome, ScenarioKind};
use crate::table::Format;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{:02x}", b)).collect()
}

/// Path of the manifest that accompanies `output`.
pub fn manifest_path(output: &Path) -> std::path::PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}

pub struct ManifestInput<'a> {
    pub kind: ScenarioKind,
    pub config_path: Option<&'a Path>,
    pub config_bytes: &'a [u8],
    pub output: &'a Path,
    pub format: Format,
    pub outcome: &'a Outcome,
}

/// No timestamps or thread counts, so identical configs give identical manifests.
pub fn build(m: &ManifestInput<'_>) -> Value {
    let extra: Vec<Value> = m.outcome.extra_files.iter().map(|(p, _)| Value::from(p.display().to_string())).collect();
    json!({
        "tool": "casimir",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": m.kind.name(),
        "config": m.config_path.map(|p| p.display().to_string()),
        "config_sha256": sha256_hex(m.config_bytes),
        "output": m.output.display().to_string(),
        "format": m.format.name(),
        "columns": m.outcome.table.columns,
        "rows": m.outcome.table.rows.len(),
        "formulas": m.outcome.formulas,
        "tolerances": m.outcome.tolerances,
        "error_estimates": m.outcome.error_estimates,
        "extra_outputs": extra,
    })
}
