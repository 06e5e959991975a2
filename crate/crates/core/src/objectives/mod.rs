//! Finite-sum objectives with hand-derived gradients.
//!
//! Every objective is a finite average `f(w) = (1/n) sum_i f_i(w)`; purely
//! deterministic functions are the `n = 1` case. Implementors supply the
//! per-sample value and gradient; averaged values, batch gradients and the
//! evaluation counter come from the provided methods of [`Objective`].

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::types::Vector;

mod dro;
mod ingest;
mod phase;
mod serial;
mod witness;

pub use dro::{
    chi2_conjugate, dro_min_eta, generate_synthetic_regression, DroInstance, DroObjective, DEFAULT_LAMBDA,
    DEFAULT_REG_WEIGHT, PSI_TOL,
};
pub use ingest::{load_regression_csv, CsvOptions, MissingPolicy};
pub use phase::{
    generate_phase_retrieval, phase_retrieval_smoothness, PhaseRetrievalInstance,
    PhaseRetrievalObjective, PhaseRetrievalParams,
};
pub use serial::InstanceFile;
pub use witness::{
    make_exponential_witness, make_polynomial_witness, ExponentialWitness, IdenticalSamples,
    PolynomialWitness, Quadratic,
};

/// Counts per-sample gradient accesses. Atomic so that concurrent readers of
/// a shared objective keep an exact tally.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Oracle bundle for a finite-sum objective.
///
/// `value` and `grad` are uncounted: they are the "true" oracles used for
/// logging and verification. The counted oracles (`sample_grad`,
/// `batch_grad`, `batch_grad_diff`, `grad_counted`) bump the evaluation
/// counter by the number of samples they touch.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn sample_count(&self) -> usize;

    /// Value of sample `i`. Panics if `i` is out of range.
    fn sample_value_at(&self, w: &Vector, i: usize) -> f64;

    /// `out += scale * grad f_i(w)`. Panics if `i` is out of range.
    fn accumulate_sample_grad(&self, w: &Vector, i: usize, scale: f64, out: &mut Vector);

    fn counter(&self) -> &EvalCounter;

    /// Short identifier used in reports.
    fn name(&self) -> String;

    fn value(&self, w: &Vector) -> f64 {
        let n = self.sample_count();
        (0..n).map(|i| self.sample_value_at(w, i)).sum::<f64>() / n as f64
    }

    fn grad(&self, w: &Vector) -> Vector {
        let n = self.sample_count();
        let mut out = Array1::zeros(self.dim());
        let scale = 1.0 / n as f64;
        for i in 0..n {
            self.accumulate_sample_grad(w, i, scale, &mut out);
        }
        out
    }

    /// Uncounted per-sample gradient, for verifiers.
    fn sample_grad_uncounted(&self, w: &Vector, i: usize) -> Result<Vector> {
        self.check_index(i)?;
        let mut out = Array1::zeros(self.dim());
        self.accumulate_sample_grad(w, i, 1.0, &mut out);
        Ok(out)
    }

    fn sample_value(&self, w: &Vector, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.sample_value_at(w, i))
    }

    fn sample_grad(&self, w: &Vector, i: usize) -> Result<Vector> {
        let g = self.sample_grad_uncounted(w, i)?;
        self.counter().add(1);
        Ok(g)
    }

    /// Average gradient over the index multiset `batch`.
    fn batch_grad(&self, w: &Vector, batch: &[usize]) -> Result<Vector> {
        if batch.is_empty() {
            return Err(Error::Argument("batch must be nonempty".into()));
        }
        for &i in batch {
            self.check_index(i)?;
        }
        let mut out = Array1::zeros(self.dim());
        let scale = 1.0 / batch.len() as f64;
        for &i in batch {
            self.accumulate_sample_grad(w, i, scale, &mut out);
        }
        self.counter().add(batch.len() as u64);
        Ok(out)
    }

    /// `grad f_S(w_new) - grad f_S(w_old)` for the same index multiset.
    ///
    /// Each sample is accessed once, so the counter advances by `|S|`.
    fn batch_grad_diff(&self, w_new: &Vector, w_old: &Vector, batch: &[usize]) -> Result<Vector> {
        if batch.is_empty() {
            return Err(Error::Argument("batch must be nonempty".into()));
        }
        for &i in batch {
            self.check_index(i)?;
        }
        let mut out = Array1::zeros(self.dim());
        let scale = 1.0 / batch.len() as f64;
        for &i in batch {
            self.accumulate_sample_grad(w_new, i, scale, &mut out);
            self.accumulate_sample_grad(w_old, i, -scale, &mut out);
        }
        self.counter().add(batch.len() as u64);
        Ok(out)
    }

    /// Full gradient, counted as `sample_count` evaluations.
    fn grad_counted(&self, w: &Vector) -> Vector {
        self.counter().add(self.sample_count() as u64);
        self.grad(w)
    }

    /// Value written to run traces. Defaults to [`Objective::value`].
    fn logged_value(&self, w: &Vector) -> f64 {
        self.value(w)
    }

    fn eval_count(&self) -> u64 {
        self.counter().get()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.sample_count() {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "sample index {i} out of range [0, {})",
                self.sample_count()
            )))
        }
    }
}
