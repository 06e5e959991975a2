//! CSV rows and the run manifest.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::ExperimentConfig;
use super::run::{ExperimentOutput, ResultRow, RunSummary};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "experiment",
    "algorithm",
    "seed",
    "t",
    "cumulative_samples",
    "f_value",
    "grad_norm",
    "wall_ms",
];

pub(crate) fn sort_key(r: &ResultRow) -> (&str, u64, usize) {
    (&r.algorithm, r.seed, r.t)
}

/// Writes `rows` sorted by `(algorithm, seed, t)`. Floats use the shortest
/// decimal that round-trips.
pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut rows: Vec<&ResultRow> = rows.iter().collect();
    rows.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.algorithm.clone(),
            r.seed.to_string(),
            r.t.to_string(),
            r.cumulative_samples.to_string(),
            r.f_value.to_string(),
            r.grad_norm.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::Ingestion {
            location: format!("{}:1", path.display()),
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool_version: &'static str,
    pub git_describe: String,
    pub config: &'a ExperimentConfig,
    pub seeds: &'a [u64],
    pub csv: String,
    pub wall_ms: f64,
    pub runs: &'a [RunSummary],
}

/// `git describe --always --dirty`, or `unknown` outside a checkout.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// Writes `<dir>/<id>.csv` and records the run under `experiments.<id>` in
/// `<dir>/manifest.json`, keeping entries of other experiments. Returns both
/// paths.
pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_name = format!("{}.csv", cfg.id);
    let csv_path = dir.join(&csv_name);
    emit_csv(&out.rows, &csv_path)?;
    let entry = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        git_describe: git_describe(),
        config: cfg,
        seeds: &cfg.seeds,
        csv: csv_name,
        wall_ms: out.wall_ms,
        runs: &out.runs,
    };
    let manifest_path = dir.join("manifest.json");
    let mut root = match std::fs::read_to_string(&manifest_path) {
        Ok(text) => match serde_json::from_str::<Value>(&text) {
            Ok(v @ Value::Object(_)) => v,
            _ => {
                log::warn!("replacing unreadable {}", manifest_path.display());
                Value::Object(Map::new())
            }
        },
        Err(_) => Value::Object(Map::new()),
    };
    let experiments = root
        .as_object_mut()
        .expect("root is an object")
        .entry("experiments")
        .or_insert_with(|| Value::Object(Map::new()));
    if !experiments.is_object() {
        *experiments = Value::Object(Map::new());
    }
    experiments
        .as_object_mut()
        .expect("checked above")
        .insert(cfg.id.clone(), serde_json::to_value(&entry)?);
    let text = serde_json::to_string_pretty(&root)?;
    std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok((csv_path, manifest_path))
}
