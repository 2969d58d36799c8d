//! CSV and JSON output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use fpplab_core::experiments::{ExperimentConfig, SCHEMA_VERSION};

use crate::Failure;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("writing {}: {e}", path.display()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    writeln!(w).map_err(|e| io_err(path, e))
}

/// `<out>.summary.json`: schema version, config echo, seed provenance and
/// the run's results. Nothing here depends on the worker count or timing.
pub fn write_summary(out: &str, echo: &ExperimentConfig, seed: u64, results: Value, pass: bool) -> Result<(), Failure> {
    let path = format!("{out}.summary.json");
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config": echo,
        "seed_provenance": {
            "master_seed": format!("{seed:#018x}"),
            "trial_seeds": "derive_trial_seed(master_seed, trial_index)",
            "edge_weights": "WeightOracle(trial_seed, layer, edge)",
        },
        "checks_passed": pass,
        "results": results,
    });
    write_json(Path::new(&path), &summary)
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}
