//! CSV ingestion for regression datasets.
//!
//! Pipeline: drop configured columns, fill missing cells, winsorize,
//! standardize, add target noise, keep the first `n` rows. Cells that are
//! empty or `NA` count as missing.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::dro::{DroInstance, DEFAULT_LAMBDA, DEFAULT_REG_WEIGHT};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Replace with the column median of the present cells.
    Median,
    /// Reject the file.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CsvOptions {
    /// Header name of the target column.
    pub target: String,
    /// Columns removed before any processing (e.g. categorical ones).
    pub drop_columns: Vec<String>,
    pub missing: MissingPolicy,
    /// Lower and upper clipping percentiles in `[0, 1]`; `None` disables.
    pub winsorize: Option<(f64, f64)>,
    pub standardize: bool,
    pub target_noise_sd: f64,
    /// Keep only the first `n` data rows.
    pub max_rows: Option<usize>,
    pub lambda: f64,
    pub reg_weight: f64,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            target: "target".into(),
            drop_columns: Vec::new(),
            missing: MissingPolicy::Median,
            winsorize: Some((0.01, 0.99)),
            standardize: true,
            target_noise_sd: 0.0,
            max_rows: None,
            lambda: DEFAULT_LAMBDA,
            reg_weight: DEFAULT_REG_WEIGHT,
        }
    }
}

fn ingestion(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Ingestion {
        location: location.into(),
        message: message.into(),
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "NA"
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted_copy(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Loads a regression dataset into a [`DroInstance`].
///
/// Errors carry the file location (`path:row:column`) of the offending cell
/// or the name of the offending column.
pub fn load_regression_csv(
    path: impl AsRef<Path>,
    opts: &CsvOptions,
    rng: &mut RngStream,
) -> Result<DroInstance> {
    let path = path.as_ref();
    if let Some((lo, hi)) = opts.winsorize {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::Argument(format!(
                "winsorize percentiles must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})"
            )));
        }
    }
    if !(opts.target_noise_sd >= 0.0) {
        return Err(Error::Argument("target_noise_sd must be >= 0".into()));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let shown = path.display().to_string();

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| ingestion(&shown, format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    for dropped in &opts.drop_columns {
        if !headers.contains(dropped) {
            return Err(ingestion(&shown, format!("drop column `{dropped}` not in header")));
        }
    }
    let kept: Vec<usize> = (0..headers.len())
        .filter(|&j| !opts.drop_columns.contains(&headers[j]))
        .collect();
    let target_pos = kept
        .iter()
        .position(|&j| headers[j] == opts.target)
        .ok_or_else(|| ingestion(&shown, format!("target column `{}` not in header", opts.target)))?;

    // columns[k][row] for the kept columns, None = missing
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); kept.len()];
    for (r, record) in reader.records().enumerate() {
        if opts.max_rows.is_some_and(|n| r >= n) {
            break;
        }
        // header is line 1
        let line = r + 2;
        let record = record.map_err(|e| ingestion(format!("{shown}:{line}"), e.to_string()))?;
        for (k, &j) in kept.iter().enumerate() {
            let cell = record.get(j).unwrap_or("");
            let value = if is_missing(cell) {
                None
            } else {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    ingestion(
                        format!("{shown}:{line}:{}", headers[j]),
                        format!("cannot parse `{cell}` as a number"),
                    )
                })?;
                if !v.is_finite() {
                    return Err(ingestion(
                        format!("{shown}:{line}:{}", headers[j]),
                        format!("non-finite value `{cell}`"),
                    ));
                }
                Some(v)
            };
            columns[k].push(value);
        }
    }
    let n = columns[0].len();
    if n == 0 {
        return Err(ingestion(&shown, "no data rows"));
    }
    if kept.len() < 2 {
        return Err(ingestion(&shown, "need at least one feature column besides the target"));
    }

    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(kept.len());
    for (k, col) in columns.iter().enumerate() {
        let name = &headers[kept[k]];
        let present = sorted_copy(col.iter().flatten().copied());
        if present.is_empty() {
            return Err(ingestion(format!("{shown}:{name}"), "column has no values"));
        }
        let fill = match opts.missing {
            MissingPolicy::Median => quantile(&present, 0.5),
            MissingPolicy::Error => {
                if let Some(r) = col.iter().position(Option::is_none) {
                    return Err(ingestion(format!("{shown}:{}:{name}", r + 2), "missing value"));
                }
                f64::NAN
            }
        };
        let mut values: Vec<f64> = col.iter().map(|v| v.unwrap_or(fill)).collect();
        if let Some((lo, hi)) = opts.winsorize {
            let sorted = sorted_copy(values.iter().copied());
            let (a, b) = (quantile(&sorted, lo), quantile(&sorted, hi));
            for v in &mut values {
                *v = v.clamp(a, b);
            }
        }
        if opts.standardize {
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            if !(var > 0.0) {
                return Err(ingestion(
                    format!("{shown}:{name}"),
                    "zero variance, cannot standardize",
                ));
            }
            let sd = var.sqrt();
            for v in &mut values {
                *v = (*v - mean) / sd;
            }
        }
        dense.push(values);
    }

    let mut y = Array1::from(dense.remove(target_pos));
    if opts.target_noise_sd > 0.0 {
        for v in y.iter_mut() {
            *v += rng.normal(0.0, opts.target_noise_sd);
        }
    }
    let p = dense.len();
    let x = Array2::from_shape_fn((n, p), |(i, j)| dense[j][i]);
    DroInstance::new(x, y, opts.lambda, opts.reg_weight)
}
