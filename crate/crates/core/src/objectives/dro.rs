//! Chi-square distributionally robust regression in its dual form
//!
//! `L(x, eta) = lambda * E psi*((l_xi(x) - eta) / lambda) + eta`,
//! `psi*(t) = (t + 2)_+^2 / 4 - 1`,
//! `l_xi(x) = (y_xi - x_xi^T x)^2 / 2 + rho * sum_j ln(1 + |x_j|)`.
//!
//! The parameter vector is `(x, eta)` with `eta` stored last.

use std::sync::Arc;

use ndarray::{s, Array1, Array2};

use super::{EvalCounter, Objective};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::Vector;

/// Default weight of the `ln(1 + |x_j|)` regularizer.
pub const DEFAULT_REG_WEIGHT: f64 = 0.1;
/// Default dual temperature.
pub const DEFAULT_LAMBDA: f64 = 0.01;
/// `|dL/deta|` tolerance used when logging `Psi`.
pub const PSI_TOL: f64 = 1e-10;

/// `(psi*(t), psi*'(t))` for the chi-square divergence.
pub fn chi2_conjugate(t: f64) -> (f64, f64) {
    let p = (t + 2.0).max(0.0);
    (0.25 * p * p - 1.0, 0.5 * p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroInstance {
    x: Array2<f64>,
    y: Array1<f64>,
    lambda: f64,
    reg_weight: f64,
}

impl DroInstance {
    pub fn new(x: Array2<f64>, y: Array1<f64>, lambda: f64, reg_weight: f64) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Argument(format!(
                "regression data needs n, p >= 1 (got n={n}, p={p})"
            )));
        }
        if y.len() != n {
            return Err(Error::Argument(format!(
                "target length {} does not match {n} rows",
                y.len()
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be > 0, got {lambda}")));
        }
        if !(reg_weight >= 0.0) {
            return Err(Error::Argument(format!(
                "regularization weight must be >= 0, got {reg_weight}"
            )));
        }
        Ok(Self {
            x,
            y,
            lambda,
            reg_weight,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be > 0, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn reg_weight(&self) -> f64 {
        self.reg_weight
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    fn regularizer(&self, w: ndarray::ArrayView1<f64>) -> f64 {
        self.reg_weight * w.iter().map(|v| v.abs().ln_1p()).sum::<f64>()
    }

    /// Per-sample losses `l_xi(x)` at model weights `w` (length `p`).
    pub fn losses(&self, w: &Vector) -> Array1<f64> {
        assert_eq!(w.len(), self.p());
        let reg = self.regularizer(w.view());
        let pred = self.x.dot(w);
        Array1::from_iter(
            self.y
                .iter()
                .zip(pred.iter())
                .map(|(y, p)| 0.5 * (y - p) * (y - p) + reg),
        )
    }
}

/// Synthetic stand-in for the regression data: standard normal features and
/// weights, `y = X w* + noise`. Uses `lambda = 0.01` and regularization 0.1.
pub fn generate_synthetic_regression(
    n: usize,
    p: usize,
    noise_sd: f64,
    rng: &mut RngStream,
) -> Result<DroInstance> {
    if n == 0 || p == 0 {
        return Err(Error::Argument("synthetic regression needs n, p >= 1".into()));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::Argument(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let x = Array2::from_shape_vec((n, p), rng.normal_vec(n * p, 0.0, 1.0))
        .expect("shape matches draw count");
    let w = Array1::from(rng.normal_vec(p, 0.0, 1.0));
    let mut y = x.dot(&w);
    if noise_sd > 0.0 {
        for v in y.iter_mut() {
            *v += rng.normal(0.0, noise_sd);
        }
    }
    DroInstance::new(x, y, DEFAULT_LAMBDA, DEFAULT_REG_WEIGHT)
}

pub struct DroObjective {
    inst: Arc<DroInstance>,
    counter: EvalCounter,
}

impl DroObjective {
    pub fn new(inst: Arc<DroInstance>) -> Self {
        Self {
            inst,
            counter: EvalCounter::new(),
        }
    }

    pub fn instance(&self) -> &DroInstance {
        &self.inst
    }

    /// `Psi(x) = min_eta L(x, eta)` for the model part of `w`.
    pub fn psi(&self, w: &Vector, tol: f64) -> Result<(f64, f64)> {
        let x = w.slice(s![..self.inst.p()]).to_owned();
        dro_min_eta(&self.inst, &x, tol)
    }

    fn sample_loss(&self, xw: ndarray::ArrayView1<f64>, i: usize) -> f64 {
        let r = self.inst.y[i] - self.inst.x.row(i).dot(&xw);
        0.5 * r * r + self.inst.regularizer(xw)
    }

    // Subgradient of rho * ln(1 + |w_j|), zero at the kink.
    fn reg_grad(&self, xw: ndarray::ArrayView1<f64>) -> Array1<f64> {
        let rho = self.inst.reg_weight;
        xw.mapv(|v| {
            if v == 0.0 {
                0.0
            } else {
                rho * v.signum() / (1.0 + v.abs())
            }
        })
    }
}

impl Objective for DroObjective {
    fn dim(&self) -> usize {
        self.inst.p() + 1
    }

    fn sample_count(&self) -> usize {
        self.inst.n()
    }

    fn sample_value_at(&self, w: &Vector, i: usize) -> f64 {
        let p = self.inst.p();
        let eta = w[p];
        let loss = self.sample_loss(w.slice(s![..p]), i);
        let lam = self.inst.lambda;
        lam * chi2_conjugate((loss - eta) / lam).0 + eta
    }

    fn accumulate_sample_grad(&self, w: &Vector, i: usize, scale: f64, out: &mut Vector) {
        let p = self.inst.p();
        let eta = w[p];
        let xw = w.slice(s![..p]);
        let row = self.inst.x.row(i);
        let r = self.inst.y[i] - row.dot(&xw);
        let loss = 0.5 * r * r + self.inst.regularizer(xw);
        let lam = self.inst.lambda;
        let dpsi = chi2_conjugate((loss - eta) / lam).1;
        {
            let mut gx = out.slice_mut(s![..p]);
            gx.scaled_add(-scale * dpsi * r, &row);
            gx.scaled_add(scale * dpsi, &self.reg_grad(xw));
        }
        out[p] += scale * (1.0 - dpsi);
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        format!("dro(n={}, p={})", self.inst.n(), self.inst.p())
    }

    fn value(&self, w: &Vector) -> f64 {
        let p = self.inst.p();
        let eta = w[p];
        let lam = self.inst.lambda;
        let losses = self.inst.losses(&w.slice(s![..p]).to_owned());
        let mean = losses
            .iter()
            .map(|l| chi2_conjugate((l - eta) / lam).0)
            .sum::<f64>()
            / self.inst.n() as f64;
        lam * mean + eta
    }

    /// Logs `Psi(x) = min_eta L(x, eta)` rather than `L(x, eta)`.
    fn logged_value(&self, w: &Vector) -> f64 {
        self.psi(w, PSI_TOL).map_or(f64::NAN, |(_, psi)| psi)
    }

    fn grad(&self, w: &Vector) -> Vector {
        let p = self.inst.p();
        let n = self.inst.n() as f64;
        let eta = w[p];
        let lam = self.inst.lambda;
        let xw = w.slice(s![..p]).to_owned();
        let reg = self.inst.regularizer(xw.view());
        let resid = &self.inst.y - &self.inst.x.dot(&xw);
        let dpsi = resid.mapv(|r| chi2_conjugate((0.5 * r * r + reg - eta) / lam).1);
        let weighted = &dpsi * &resid;
        let mut out = Array1::zeros(p + 1);
        {
            let mut gx = out.slice_mut(s![..p]);
            gx.assign(&(self.inst.x.t().dot(&weighted) * (-1.0 / n)));
            gx.scaled_add(dpsi.sum() / n, &self.reg_grad(xw.view()));
        }
        out[p] = 1.0 - dpsi.sum() / n;
        out
    }
}

/// Minimizes `L(x, eta)` over `eta` by bisection on the nondecreasing map
/// `eta -> 1 - E psi*'((l_xi(x) - eta) / lambda)`.
///
/// Returns `(eta*, L(x, eta*))` with `|dL/deta| <= tol` at `eta*`.
pub fn dro_min_eta(inst: &DroInstance, x: &Vector, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tol must be > 0, got {tol}")));
    }
    if x.len() != inst.p() {
        return Err(Error::Argument(format!(
            "model weights have length {}, expected {}",
            x.len(),
            inst.p()
        )));
    }
    let losses = inst.losses(x);
    let lam = inst.lambda;
    let n = losses.len() as f64;
    let deriv = |eta: f64| {
        1.0 - losses
            .iter()
            .map(|l| chi2_conjugate((l - eta) / lam).1)
            .sum::<f64>()
            / n
    };
    let lmin = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lmin.is_finite() || !lmax.is_finite() {
        return Err(Error::Numerical("sample losses are not finite".into()));
    }

    let mut lo = lmin - 10.0 * lam * n.max(1.0);
    let mut hi = lmax + 2.0 * lam;
    let mut width = hi - lo;
    let mut doublings = 0;
    while deriv(lo) > 0.0 {
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Numerical("eta bracket expansion exceeded 60 doublings".into()));
        }
        width *= 2.0;
        lo = hi - width;
    }
    while deriv(hi) < 0.0 {
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Numerical("eta bracket expansion exceeded 60 doublings".into()));
        }
        width *= 2.0;
        hi = lo + width;
    }

    let value_at = |eta: f64| {
        lam * losses
            .iter()
            .map(|l| chi2_conjugate((l - eta) / lam).0)
            .sum::<f64>()
            / n
            + eta
    };

    let mut eta = 0.5 * (lo + hi);
    for _ in 0..400 {
        eta = 0.5 * (lo + hi);
        let d = deriv(eta);
        if d.abs() <= tol {
            return Ok((eta, value_at(eta)));
        }
        if d < 0.0 {
            lo = eta;
        } else {
            hi = eta;
        }
        if hi - lo <= f64::EPSILON * eta.abs().max(1.0) {
            break;
        }
    }
    let d = deriv(eta);
    if d.abs() <= tol {
        Ok((eta, value_at(eta)))
    } else {
        Err(Error::Numerical(format!(
            "bisection stalled with |dL/deta| = {d:e} > {tol:e}"
        )))
    }
}
