//! First-order methods and their theoretical hyperparameters.
//!
//! Every method returns a [`RunTrace`]. Records at iteration `t` hold the
//! true objective value and gradient norm at `w_t` and the number of
//! per-sample gradient evaluations spent to reach `w_t`. Logging uses the
//! uncounted oracles, so the final `cumulative_samples` equals the change in
//! the objective's evaluation counter.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, distance, norm};
use crate::objectives::Objective;
use crate::rng::{RngStream, OUTPUT_INDEX};
use crate::types::Vector;

mod deterministic;
mod stochastic;
mod theory;

pub use deterministic::{beta_gd, clipped_gd};
pub use stochastic::{sgd_family, spider, spider_correction, SgdVariant, SpiderConfig};
pub use theory::{
    certificate_threshold, divergence_certificate, theoretical_gamma_det,
    theoretical_spider_hyperparams, DetSchedule, DivergenceCertificate, SpiderPlan,
};

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e12;

/// What to do when the (estimated) gradient is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradZeroPolicy {
    /// Stop and pad the remaining records with the stationary point.
    Halt,
    /// Keep iterating without moving.
    #[default]
    ZeroStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Seed for the `batch` and `output-index` streams.
    pub seed: u64,
    /// Record every `log_every` iterations (and always the last one).
    pub log_every: usize,
    pub grad_zero_policy: GradZeroPolicy,
    /// `|f|` or `||w||` above this, or any non-finite value, stops the run.
    pub divergence_threshold: f64,
    /// Minibatches drawn i.i.d. with replacement.
    pub with_replacement: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            log_every: 1,
            grad_zero_policy: GradZeroPolicy::ZeroStep,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
            with_replacement: true,
        }
    }
}

impl RunOptions {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub f_value: f64,
    pub grad_norm: f64,
    pub param_norm: f64,
    pub cumulative_samples: u64,
    /// `||v_t - grad f(w_t)||` for estimator-based methods.
    pub estimator_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Stopped at a zero gradient under [`GradZeroPolicy::Halt`].
    Halted { t: usize },
    /// Left the finite/threshold region; `last_finite_t` is the last
    /// recorded iteration.
    Diverged { last_finite_t: usize },
}

/// Log of one optimizer run. Equality ignores wall-clock timings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub iterations: usize,
    pub records: Vec<TraceRecord>,
    pub final_point: Vec<f64>,
    /// Uniform draw from `0..iterations`.
    pub output_index: usize,
    /// Iterate at `output_index`, if the run reached it.
    pub output_point: Option<Vec<f64>>,
    pub status: RunStatus,
    /// `||w_{t+1} - w_t||` for every visited iterate after the first.
    pub step_norms: Vec<f64>,
    /// Milliseconds since the start of the run, one per record.
    pub wall_ms: Vec<f64>,
}

impl PartialEq for RunTrace {
    fn eq(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.iterations == other.iterations
            && self.records == other.records
            && self.final_point == other.final_point
            && self.output_index == other.output_index
            && self.output_point == other.output_point
            && self.status == other.status
            && self.step_norms == other.step_norms
    }
}

impl RunTrace {
    pub fn diverged(&self) -> Option<usize> {
        match self.status {
            RunStatus::Diverged { last_finite_t } => Some(last_finite_t),
            _ => None,
        }
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("traces hold at least the t = 0 record")
    }

    pub fn min_grad_norm(&self) -> f64 {
        self.records.iter().map(|r| r.grad_norm).fold(f64::INFINITY, f64::min)
    }
}

/// Draws the output index up front so it does not depend on the run.
pub fn draw_output_index(seed: u64, iterations: usize) -> usize {
    RngStream::new(seed, OUTPUT_INDEX).index(iterations)
}

pub(crate) fn check_start(f: &dyn Objective, w0: &Vector, iterations: usize) -> Result<()> {
    if w0.len() != f.dim() {
        return Err(Error::Argument(format!(
            "start point has dimension {}, objective expects {}",
            w0.len(),
            f.dim()
        )));
    }
    if !all_finite(w0) {
        return Err(Error::Argument("start point has non-finite entries".into()));
    }
    if iterations == 0 {
        return Err(Error::Argument("iteration count must be >= 1".into()));
    }
    Ok(())
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("step size must be finite and >= 0, got {gamma}")))
    }
}

/// Shared bookkeeping for all methods.
pub(crate) struct Recorder<'a> {
    f: &'a dyn Objective,
    opts: &'a RunOptions,
    algorithm: String,
    iterations: usize,
    start_count: u64,
    clock: Instant,
    records: Vec<TraceRecord>,
    wall_ms: Vec<f64>,
    output_index: usize,
    output_point: Option<Vec<f64>>,
    previous: Option<Vector>,
    step_norms: Vec<f64>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(f: &'a dyn Objective, opts: &'a RunOptions, algorithm: &str, iterations: usize) -> Result<Self> {
        if opts.log_every == 0 {
            return Err(Error::Argument("log_every must be >= 1".into()));
        }
        Ok(Self {
            f,
            opts,
            algorithm: algorithm.to_owned(),
            iterations,
            start_count: f.eval_count(),
            clock: Instant::now(),
            records: Vec::new(),
            wall_ms: Vec::new(),
            output_index: draw_output_index(opts.seed, iterations),
            output_point: None,
            previous: None,
            step_norms: Vec::new(),
        })
    }

    pub(crate) fn samples(&self) -> u64 {
        self.f.eval_count() - self.start_count
    }

    fn due(&self, t: usize) -> bool {
        t.is_multiple_of(self.opts.log_every) || t == self.iterations
    }

    /// Logs `w_t` if due, with `samples` spent to reach it. `known_grad_norm`
    /// avoids recomputing an exact gradient the method already has. Returns
    /// `false` when `w_t` is outside the divergence threshold.
    pub(crate) fn visit(
        &mut self,
        t: usize,
        w: &Vector,
        samples: u64,
        known_grad_norm: Option<f64>,
        estimator: Option<&Vector>,
    ) -> bool {
        if let Some(prev) = self.previous.replace(w.clone()) {
            self.step_norms.push(distance(&prev, w));
        }
        let thr = self.opts.divergence_threshold;
        let wn = norm(w);
        if !wn.is_finite() || wn > thr {
            return false;
        }
        if t == self.output_index {
            self.output_point = Some(w.to_vec());
        }
        if !self.due(t) {
            return true;
        }
        let fv = self.f.logged_value(w);
        if !fv.is_finite() {
            return false;
        }
        let (g_norm, est) = match estimator {
            Some(v) => {
                let g = self.f.grad(w);
                (norm(&g), Some(norm(&(v - &g))))
            }
            None => (known_grad_norm.unwrap_or_else(|| norm(&self.f.grad(w))), None),
        };
        self.records.push(TraceRecord {
            t,
            f_value: fv,
            grad_norm: g_norm,
            param_norm: wn,
            cumulative_samples: samples,
            estimator_error: est,
        });
        self.wall_ms.push(self.clock.elapsed().as_secs_f64() * 1e3);
        fv.abs() <= thr
    }

    /// Pads records `t + 1 ..= iterations` with the stationary point `w`.
    pub(crate) fn pad(&mut self, t: usize, w: &Vector) {
        let samples = self.samples();
        for s in t + 1..=self.iterations {
            self.visit(s, w, samples, Some(0.0), None);
        }
    }

    pub(crate) fn finish(self, w: &Vector, status: RunStatus) -> RunTrace {
        let status = match status {
            RunStatus::Diverged { .. } => RunStatus::Diverged {
                last_finite_t: self.records.last().map_or(0, |r| r.t),
            },
            s => s,
        };
        RunTrace {
            algorithm: self.algorithm,
            iterations: self.iterations,
            records: self.records,
            final_point: w.to_vec(),
            output_index: self.output_index,
            output_point: self.output_point,
            status,
            step_norms: self.step_norms,
            wall_ms: self.wall_ms,
        }
    }
}
