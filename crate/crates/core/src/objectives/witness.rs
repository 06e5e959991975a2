//! Radial witness functions and small helper objectives.

use ndarray::Array1;

use super::{EvalCounter, Objective};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::types::Vector;

/// `f(w) = ||w||^p` with `p = (2 - alpha) / (1 - alpha)`.
#[derive(Debug)]
pub struct PolynomialWitness {
    alpha: f64,
    dim: usize,
    exponent: f64,
    counter: EvalCounter,
}

pub fn make_polynomial_witness(alpha: f64, dim: usize) -> Result<PolynomialWitness> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "polynomial witness needs alpha in (0, 1), got {alpha}"
        )));
    }
    if dim == 0 {
        return Err(Error::Argument("dim must be >= 1".into()));
    }
    Ok(PolynomialWitness {
        alpha,
        dim,
        exponent: (2.0 - alpha) / (1.0 - alpha),
        counter: EvalCounter::new(),
    })
}

impl PolynomialWitness {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// The `L1` of the sufficient membership bound for this witness at its
    /// own alpha (with `L0` arbitrarily small):
    /// `(2 - a)^(1 - a) / (1 - a)^(2 - a)`.
    pub fn membership_l1(&self) -> f64 {
        let a = self.alpha;
        (2.0 - a).powf(1.0 - a) / (1.0 - a).powf(2.0 - a)
    }
}

impl Objective for PolynomialWitness {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_count(&self) -> usize {
        1
    }

    fn sample_value_at(&self, w: &Vector, i: usize) -> f64 {
        assert_eq!(i, 0);
        norm(w).powf(self.exponent)
    }

    fn accumulate_sample_grad(&self, w: &Vector, i: usize, scale: f64, out: &mut Vector) {
        assert_eq!(i, 0);
        let r = norm(w);
        if r == 0.0 {
            return;
        }
        // p ||w||^(p-2) w; p - 2 = alpha / (1 - alpha) > 0.
        let c = scale * self.exponent * r.powf(self.exponent - 2.0);
        out.scaled_add(c, w);
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        format!("poly(alpha={})", self.alpha)
    }
}

/// `f(w) = e^||w|| + e^-||w||`.
#[derive(Debug)]
pub struct ExponentialWitness {
    dim: usize,
    counter: EvalCounter,
}

pub fn make_exponential_witness(dim: usize) -> Result<ExponentialWitness> {
    if dim == 0 {
        return Err(Error::Argument("dim must be >= 1".into()));
    }
    Ok(ExponentialWitness {
        dim,
        counter: EvalCounter::new(),
    })
}

// sinh(r) / r, accurate near zero.
fn sinhc(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 + r * r / 6.0
    } else {
        r.sinh() / r
    }
}

impl Objective for ExponentialWitness {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_count(&self) -> usize {
        1
    }

    fn sample_value_at(&self, w: &Vector, i: usize) -> f64 {
        assert_eq!(i, 0);
        2.0 * norm(w).cosh()
    }

    fn accumulate_sample_grad(&self, w: &Vector, i: usize, scale: f64, out: &mut Vector) {
        assert_eq!(i, 0);
        // (e^r - e^-r) w / r
        let r = norm(w);
        out.scaled_add(scale * 2.0 * sinhc(r), w);
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        "exp".into()
    }
}

/// `f(w) = (c/2) ||w||^2`; `c = 1` unless built with [`Quadratic::scaled`].
#[derive(Debug)]
pub struct Quadratic {
    dim: usize,
    curvature: f64,
    counter: EvalCounter,
}

impl Quadratic {
    pub fn new(dim: usize) -> Self {
        Self::scaled(dim, 1.0)
    }

    pub fn scaled(dim: usize, curvature: f64) -> Self {
        assert!(dim > 0);
        Self {
            dim,
            curvature,
            counter: EvalCounter::new(),
        }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_count(&self) -> usize {
        1
    }

    fn sample_value_at(&self, w: &Vector, i: usize) -> f64 {
        assert_eq!(i, 0);
        0.5 * self.curvature * w.dot(w)
    }

    fn accumulate_sample_grad(&self, w: &Vector, i: usize, scale: f64, out: &mut Vector) {
        assert_eq!(i, 0);
        out.scaled_add(scale * self.curvature, w);
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        "quadratic".into()
    }
}

/// Finite sum of `n` identical copies of a single-sample objective.
/// Its stochastic gradients have zero variance.
pub struct IdenticalSamples<O> {
    inner: O,
    n: usize,
    counter: EvalCounter,
}

impl<O: Objective> IdenticalSamples<O> {
    pub fn new(inner: O, n: usize) -> Self {
        assert!(n > 0);
        assert_eq!(inner.sample_count(), 1, "inner objective must have one sample");
        Self {
            inner,
            n,
            counter: EvalCounter::new(),
        }
    }
}

impl<O: Objective> Objective for IdenticalSamples<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sample_count(&self) -> usize {
        self.n
    }

    fn sample_value_at(&self, w: &Vector, i: usize) -> f64 {
        assert!(i < self.n);
        self.inner.sample_value_at(w, 0)
    }

    fn accumulate_sample_grad(&self, w: &Vector, i: usize, scale: f64, out: &mut Vector) {
        assert!(i < self.n);
        self.inner.accumulate_sample_grad(w, 0, scale, out)
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        format!("{}x{}", self.inner.name(), self.n)
    }

    fn value(&self, w: &Vector) -> f64 {
        self.inner.sample_value_at(w, 0)
    }

    fn grad(&self, w: &Vector) -> Vector {
        let mut out = Array1::zeros(self.dim());
        self.inner.accumulate_sample_grad(w, 0, 1.0, &mut out);
        out
    }
}
