//! Domain types shared by every module.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense working vector.
pub type Vector = Array1<f64>;

/// A finite parameter vector of fixed dimension.
///
/// Houses the model parameters of every objective in the crate; for DRO
/// problems the dual variable `eta` is stored as the last coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint(Vector);

impl ParamPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::from_array(Array1::from(values))
    }

    pub fn from_array(values: Vector) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument("parameter vector must have dim >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "parameter entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    /// `n` copies of `value`.
    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        Self::from_array(Array1::from_elem(dim, value))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_array(&self) -> &Vector {
        &self.0
    }

    pub fn into_array(self) -> Vector {
        self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.to_vec()
    }
}

impl AsRef<Vector> for ParamPoint {
    fn as_ref(&self) -> &Vector {
        &self.0
    }
}

/// Parameters `(alpha, L0, L1)` of the alpha-symmetric generalized-smooth
/// condition
///
/// `||grad f(w') - grad f(w)|| <= (L0 + L1 * max_theta ||grad f(w_theta)||^alpha) ||w' - w||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessSpec {
    pub alpha: f64,
    pub l0: f64,
    pub l1: f64,
}

impl SmoothnessSpec {
    pub fn new(alpha: f64, l0: f64, l1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(Error::Domain(format!("L0 must be finite and > 0, got {l0}")));
        }
        if !(l1 > 0.0 && l1.is_finite()) {
            return Err(Error::Domain(format!("L1 must be finite and > 0, got {l1}")));
        }
        Ok(Self { alpha, l0, l1 })
    }

    /// True when `alpha` is strictly inside `(0, 1)`, the range where the
    /// polynomial-type constants are defined.
    pub fn is_interior(&self) -> bool {
        self.alpha > 0.0 && self.alpha < 1.0
    }
}

/// Variance parameters `(Gamma, Lambda)` of the bound
/// `E||grad f_xi(w) - grad f(w)||^2 <= Gamma^2 ||grad f(w)||^2 + Lambda^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gamma: f64,
    pub lambda: f64,
}

impl NoiseSpec {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("Gamma", gamma), ("Lambda", lambda)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { gamma, lambda })
    }

    /// Right-hand side of the variance bound at gradient norm `grad_norm`.
    pub fn variance_bound(&self, grad_norm: f64) -> f64 {
        self.gamma * self.gamma * grad_norm * grad_norm + self.lambda * self.lambda
    }

    /// Moment bound `(Gamma^tau + 1) ||grad f||^tau + Lambda^tau`, valid for
    /// `tau` in `[0, 2]` whenever the variance bound holds.
    pub fn moment_bound(&self, grad_norm: f64, tau: f64) -> f64 {
        use crate::linalg::pow0;
        (pow0(self.gamma, tau) + 1.0) * pow0(grad_norm, tau) + pow0(self.lambda, tau)
    }
}
