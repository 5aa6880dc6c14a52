//! `run_meta.json`: the record that makes a run reproducible. It lists
//! the effective parameters (flags merged over config), the digest of
//! every input, and the files written. Deliberately no timestamps, so
//! identical runs stay byte-identical.

use crate::inputs::{InputDigest, OutDir};
use crate::jsonnum;
use crate::CliError;
use serde_json::{json, Value};

pub struct RunMeta {
    pub command: &'static str,
    pub parameters: Value,
    pub inputs: Vec<InputDigest>,
    pub notes: Vec<String>,
}

/// Writes `run_meta.json` into `out`. Call after every data export so the
/// outputs list is complete; the meta file does not list itself.
pub fn write_run_meta(out: &mut OutDir, meta: &RunMeta) -> Result<(), CliError> {
    let inputs: Vec<Value> = meta
        .inputs
        .iter()
        .map(|d| json!({"path": d.path, "sha256": d.sha256}))
        .collect();
    let value = json!({
        "command": meta.command,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": meta.parameters,
        "inputs": inputs,
        "outputs": out.outputs(),
        "notes": meta.notes,
    });
    out.write("run_meta.json", &jsonnum::to_bytes(&value))
}
