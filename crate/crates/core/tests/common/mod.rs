#![allow(dead_code)]

use std::sync::Arc;

use gsmooth::objectives::{
    generate_phase_retrieval, generate_synthetic_regression, DroInstance, DroObjective, EvalCounter, Objective,
    PhaseRetrievalInstance, PhaseRetrievalObjective, PhaseRetrievalParams,
};
use gsmooth::{RngStream, Vector};
use ndarray::Array1;

/// Central-difference gradient of `value` with step `h = 1e-5 (1 + ||w||)`.
pub fn fd_grad(value: impl Fn(&Vector) -> f64, w: &Vector) -> Vector {
    let h = fd_step(w);
    let mut g = Array1::zeros(w.len());
    for k in 0..w.len() {
        let mut up = w.clone();
        let mut down = w.clone();
        up[k] += h;
        down[k] -= h;
        g[k] = (value(&up) - value(&down)) / (2.0 * h);
    }
    g
}

pub fn fd_step(w: &Vector) -> f64 {
    1e-5 * (1.0 + w.dot(w).sqrt())
}

/// `||fd - g|| / max(||g||, 1)`.
pub fn fd_rel_error(value: impl Fn(&Vector) -> f64, grad: &Vector, w: &Vector) -> f64 {
    let fd = fd_grad(value, w);
    let err = (&fd - grad).dot(&(&fd - grad)).sqrt();
    err / grad.dot(grad).sqrt().max(1.0)
}

/// The small phase retrieval instance (`d = 5`, `m = 20`).
pub fn phase_small(seed: u64) -> (PhaseRetrievalObjective, Vector) {
    phase(5, 20, seed)
}

pub fn phase(d: usize, m: usize, seed: u64) -> (PhaseRetrievalObjective, Vector) {
    let (inst, _, z0) =
        generate_phase_retrieval(&PhaseRetrievalParams::new(d, m), &mut RngStream::new(seed, "data")).unwrap();
    (PhaseRetrievalObjective::new(Arc::new(inst)), z0)
}

pub fn phase_instance(seed: u64) -> Arc<PhaseRetrievalInstance> {
    let (inst, _, _) =
        generate_phase_retrieval(&PhaseRetrievalParams::new(5, 20), &mut RngStream::new(seed, "data")).unwrap();
    Arc::new(inst)
}

pub fn dro_small(seed: u64) -> DroObjective {
    let inst = generate_synthetic_regression(50, 4, 1.0, &mut RngStream::new(seed, "data")).unwrap();
    DroObjective::new(Arc::new(inst))
}

/// True when the finite-difference stencil around `w` crosses a kink of
/// the DRO objective: a sign change of some `x_j`, or of some `t_i + 2`
/// with `t_i = (l_i(x) - eta) / lambda`.
pub fn dro_stencil_crosses_kink(inst: &DroInstance, w: &Vector) -> bool {
    let h = fd_step(w);
    let p = inst.p();
    let pattern = |v: &Vector| -> Vec<bool> {
        let x = v.slice(ndarray::s![..p]).to_owned();
        let eta = v[p];
        let mut s: Vec<bool> = x.iter().map(|&xj| xj > 0.0).collect();
        s.extend(inst.losses(&x).iter().map(|&l| (l - eta) / inst.lambda() + 2.0 > 0.0));
        s
    };
    let base = pattern(w);
    (0..w.len()).any(|k| {
        [h, -h].iter().any(|&d| {
            let mut v = w.clone();
            v[k] += d;
            pattern(&v) != base
        })
    })
}

/// Sample `i` of `inner` as a one-sample objective.
pub struct SingleSample<'a> {
    pub inner: &'a dyn Objective,
    pub index: usize,
    pub counter: EvalCounter,
}

impl<'a> SingleSample<'a> {
    pub fn new(inner: &'a dyn Objective, index: usize) -> Self {
        Self {
            inner,
            index,
            counter: EvalCounter::new(),
        }
    }
}

impl Objective for SingleSample<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sample_count(&self) -> usize {
        1
    }

    fn sample_value_at(&self, w: &Vector, _: usize) -> f64 {
        self.inner.sample_value_at(w, self.index)
    }

    fn accumulate_sample_grad(&self, w: &Vector, _: usize, scale: f64, out: &mut Vector) {
        self.inner.accumulate_sample_grad(w, self.index, scale, out)
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn name(&self) -> String {
        format!("{}[{}]", self.inner.name(), self.index)
    }
}

/// Median of a nonempty slice (mean of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
