//! JSON layout for caching generated problem instances.
//!
//! ```json
//! {"kind": "phase_retrieval", "a": [[...], ...], "y": [...]}
//! {"kind": "dro", "x": [[...], ...], "y": [...], "lambda": 0.01, "reg_weight": 0.1}
//! ```
//!
//! Matrices are stored row-major as arrays of rows. Floats round-trip
//! exactly.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::dro::DroInstance;
use super::phase::PhaseRetrievalInstance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceFile {
    PhaseRetrieval {
        a: Vec<Vec<f64>>,
        y: Vec<f64>,
    },
    Dro {
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        lambda: f64,
        reg_weight: f64,
    },
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != p) {
        return Err(Error::Argument(format!(
            "row {bad} has length {}, expected {p}",
            rows[bad].len()
        )));
    }
    Ok(Array2::from_shape_vec((n, p), rows.concat()).expect("rows are rectangular"))
}

impl From<&PhaseRetrievalInstance> for InstanceFile {
    fn from(inst: &PhaseRetrievalInstance) -> Self {
        InstanceFile::PhaseRetrieval {
            a: rows(inst.a()),
            y: inst.y().to_vec(),
        }
    }
}

impl From<&DroInstance> for InstanceFile {
    fn from(inst: &DroInstance) -> Self {
        InstanceFile::Dro {
            x: rows(inst.features()),
            y: inst.targets().to_vec(),
            lambda: inst.lambda(),
            reg_weight: inst.reg_weight(),
        }
    }
}

impl InstanceFile {
    pub fn to_phase_retrieval(&self) -> Result<PhaseRetrievalInstance> {
        match self {
            InstanceFile::PhaseRetrieval { a, y } => {
                PhaseRetrievalInstance::new(matrix(a)?, Array1::from(y.clone()))
            }
            _ => Err(Error::Argument("instance file is not a phase retrieval problem".into())),
        }
    }

    pub fn to_dro(&self) -> Result<DroInstance> {
        match self {
            InstanceFile::Dro {
                x,
                y,
                lambda,
                reg_weight,
            } => DroInstance::new(matrix(x)?, Array1::from(y.clone()), *lambda, *reg_weight),
            _ => Err(Error::Argument("instance file is not a DRO problem".into())),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
