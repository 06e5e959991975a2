//! Real-valued phase retrieval from noisy intensity measurements.
//!
//! `f(z) = (1/2m) sum_r (y_r - (a_r^T z)^2)^2`, with per-sample gradient
//! `2 ((a_r^T z)^2 - y_r) (a_r^T z) a_r`.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};

use super::{EvalCounter, Objective};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::{SmoothnessSpec, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRetrievalInstance {
    a: Array2<f64>,
    y: Array1<f64>,
    a_max: f64,
    y_max: f64,
}

impl PhaseRetrievalInstance {
    /// `a` is `m x d` (one measurement vector per row).
    pub fn new(a: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (m, d) = a.dim();
        if m == 0 || d == 0 {
            return Err(Error::Argument(format!(
                "phase retrieval needs m, d >= 1 (got m={m}, d={d})"
            )));
        }
        if y.len() != m {
            return Err(Error::Argument(format!(
                "measurement count {} does not match {m} rows",
                y.len()
            )));
        }
        let a_max = a
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .fold(0.0, f64::max);
        let y_max = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(Self { a, y, a_max, y_max })
    }

    /// Measurements `y_r = (a_r^T z)^2 + noise_r` of a known signal.
    pub fn measure(a: Array2<f64>, signal: &Vector, noise: &[f64]) -> Result<Self> {
        if signal.len() != a.ncols() {
            return Err(Error::Argument("signal dimension mismatch".into()));
        }
        if noise.len() != a.nrows() {
            return Err(Error::Argument("noise length mismatch".into()));
        }
        let s = a.dot(signal);
        let y = Array1::from_iter(s.iter().zip(noise).map(|(v, n)| v * v + n));
        Self::new(a, y)
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    /// `max_r ||a_r||`
    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// `max_r |y_r|`
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
}

/// Generation settings. Defaults follow the full-scale experiment:
/// Gaussian entries with variance 0.5, noise sd 4, initialization around 5.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRetrievalParams {
    pub d: usize,
    pub m: usize,
    #[serde(default)]
    pub mean_a: f64,
    #[serde(default = "default_half_sd")]
    pub sd_a: f64,
    #[serde(default)]
    pub mean_z: f64,
    #[serde(default = "default_half_sd")]
    pub sd_z: f64,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    #[serde(default = "default_init_mean")]
    pub init_mean: f64,
    #[serde(default = "default_half_sd")]
    pub init_sd: f64,
}

fn default_half_sd() -> f64 {
    0.5f64.sqrt()
}

fn default_noise_sd() -> f64 {
    4.0
}

fn default_init_mean() -> f64 {
    5.0
}

impl PhaseRetrievalParams {
    pub fn new(d: usize, m: usize) -> Self {
        Self {
            d,
            m,
            mean_a: 0.0,
            sd_a: default_half_sd(),
            mean_z: 0.0,
            sd_z: default_half_sd(),
            noise_sd: default_noise_sd(),
            init_mean: default_init_mean(),
            init_sd: default_half_sd(),
        }
    }
}

/// Returns `(instance, true_signal, init_point)`.
///
/// Draw order on `rng`: the `m x d` matrix row-major, the signal, then the
/// noise. The initial point comes from the child stream `init`.
pub fn generate_phase_retrieval(
    params: &PhaseRetrievalParams,
    rng: &mut RngStream,
) -> Result<(PhaseRetrievalInstance, Vector, Vector)> {
    let PhaseRetrievalParams { d, m, .. } = *params;
    if d == 0 || m == 0 {
        return Err(Error::Argument("phase retrieval needs d, m >= 1".into()));
    }
    for (name, sd) in [
        ("sd_a", params.sd_a),
        ("sd_z", params.sd_z),
        ("noise_sd", params.noise_sd),
        ("init_sd", params.init_sd),
    ] {
        if !(sd >= 0.0) {
            return Err(Error::Argument(format!("{name} must be >= 0, got {sd}")));
        }
    }
    let a = Array2::from_shape_vec((m, d), rng.normal_vec(m * d, params.mean_a, params.sd_a))
        .expect("shape matches draw count");
    let z = Array1::from(rng.normal_vec(d, params.mean_z, params.sd_z));
    let noise = rng.normal_vec(m, 0.0, params.noise_sd);
    let mut init_rng = rng.child("init");
    let z0 = Array1::from(init_rng.normal_vec(d, params.init_mean, params.init_sd));
    let inst = PhaseRetrievalInstance::measure(a, &z, &noise)?;
    Ok((inst, z, z0))
}

/// Per-sample constants `(alpha = 2/3, L0 = 2 y_max a_max^2,
/// L1 = 9/4 a_max^(4/3))`.
///
/// `L0` is floored at the smallest positive double so that noiseless
/// all-zero measurements still give a valid spec.
pub fn phase_retrieval_smoothness(inst: &PhaseRetrievalInstance) -> SmoothnessSpec {
    let a = inst.a_max();
    let l0 = (2.0 * inst.y_max() * a * a).max(f64::MIN_POSITIVE);
    let l1 = (2.25 * a.powf(4.0 / 3.0)).max(f64::MIN_POSITIVE);
    SmoothnessSpec {
        alpha: 2.0 / 3.0,
        l0,
        l1,
    }
}

pub struct PhaseRetrievalObjective {
    inst: Arc<PhaseRetrievalInstance>,
    counter: EvalCounter,
}

impl PhaseRetrievalObjective {
    pub fn new(inst: Arc<PhaseRetrievalInstance>) -> Self {
        Self {
            inst,
            counter: EvalCounter::new(),
        }
    }

    pub fn instance(&self) -> &PhaseRetrievalInstance {
        &self.inst
    }
}

impl Objective for PhaseRetrievalObjective {
    fn dim(&self) -> usize {
        self.inst.dim()
    }

    fn sample_count(&self) -> usize {
        self.inst.len()
    }

    fn sample_value_at(&self, z: &Vector, r: usize) -> f64 {
        let s = self.inst.a.row(r).dot(z);
        let res = self.inst.y[r] - s * s;
        0.5 * res * res
    }

    fn accumulate_sample_grad(&self, z: &Vector, r: usize, scale: f64, out: &mut Vector) {
        let row = self.inst.a.row(r);
        let s = row.dot(z);
        let c = 2.0 * (s * s - self.inst.y[r]) * s;
        out.scaled_add(scale * c, &row);
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        format!("phase(d={}, m={})", self.inst.dim(), self.inst.len())
    }

    fn value(&self, z: &Vector) -> f64 {
        let s = self.inst.a.dot(z);
        let m = self.inst.len() as f64;
        s.iter()
            .zip(self.inst.y.iter())
            .map(|(s, y)| {
                let r = y - s * s;
                r * r
            })
            .sum::<f64>()
            / (2.0 * m)
    }

    fn grad(&self, z: &Vector) -> Vector {
        let s = self.inst.a.dot(z);
        let m = self.inst.len() as f64;
        let coef = Array1::from_iter(
            s.iter()
                .zip(self.inst.y.iter())
                .map(|(s, y)| 2.0 * (s * s - y) * s / m),
        );
        self.inst.a.t().dot(&coef)
    }
}

impl PhaseRetrievalInstance {
    /// Row norms `||a_r||`.
    pub fn row_norms(&self) -> Array1<f64> {
        self.a.map_axis(Axis(1), |r| r.dot(&r).sqrt())
    }
}
