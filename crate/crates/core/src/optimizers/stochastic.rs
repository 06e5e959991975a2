use serde::{Deserialize, Serialize};

use super::{check_gamma, check_start, Recorder, RunOptions, RunStatus, RunTrace};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm};
use crate::objectives::Objective;
use crate::rng::{RngStream, BATCH};
use crate::types::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SgdVariant {
    /// `w - gamma g`.
    Plain,
    /// `w - gamma g / ||g||`.
    Normalized,
    /// `m_t = (1 - mu) m_{t-1} + mu g_t` with `m_0 = g_0`, then
    /// `w - gamma m / ||m||`.
    Momentum { mu: f64 },
    /// `w - gamma g / max(||g||, clip)`.
    Clipped { clip: f64 },
}

impl SgdVariant {
    fn validate(&self) -> Result<()> {
        match *self {
            SgdVariant::Momentum { mu } if !(mu > 0.0 && mu <= 1.0) => {
                Err(Error::Argument(format!("momentum mu must lie in (0, 1], got {mu}")))
            }
            SgdVariant::Clipped { clip } if !(clip > 0.0 && clip.is_finite()) => {
                Err(Error::Argument(format!("clip threshold must be > 0, got {clip}")))
            }
            _ => Ok(()),
        }
    }

    fn label(&self) -> String {
        match self {
            SgdVariant::Plain => "sgd".into(),
            SgdVariant::Normalized => "normalized_sgd".into(),
            SgdVariant::Momentum { mu } => format!("momentum_sgd(mu={mu})"),
            SgdVariant::Clipped { clip } => format!("clipped_sgd(C={clip})"),
        }
    }
}

fn draw(rng: &mut RngStream, n: usize, count: usize, opts: &RunOptions) -> Result<Vec<usize>> {
    if !opts.with_replacement && count > n {
        return Err(Error::Argument(format!(
            "batch of {count} exceeds {n} samples without replacement"
        )));
    }
    Ok(rng.batch(n, count, opts.with_replacement))
}

/// Minibatch SGD and its normalized, momentum and clipped variants. Batches
/// come from the `batch` stream of `opts.seed`; a zero stochastic gradient
/// under a normalized variant gives a zero step.
pub fn sgd_family(
    f: &dyn Objective,
    w0: &Vector,
    gamma: f64,
    iterations: usize,
    batch: usize,
    variant: SgdVariant,
    opts: &RunOptions,
) -> Result<RunTrace> {
    check_gamma(gamma)?;
    check_start(f, w0, iterations)?;
    variant.validate()?;
    if batch == 0 {
        return Err(Error::Argument("batch size must be >= 1".into()));
    }
    let n = f.sample_count();
    let mut rng = RngStream::new(opts.seed, BATCH);
    let mut rec = Recorder::new(f, opts, &variant.label(), iterations)?;
    let mut w = w0.clone();
    let mut momentum: Option<Vector> = None;
    for t in 0..iterations {
        let samples = rec.samples();
        if !rec.visit(t, &w, samples, None, None) {
            return Ok(rec.finish(&w, RunStatus::Diverged { last_finite_t: t }));
        }
        let idx = draw(&mut rng, n, batch, opts)?;
        let g = f.batch_grad(&w, &idx)?;
        let gn = norm(&g);
        if !gn.is_finite() {
            return Ok(rec.finish(&w, RunStatus::Diverged { last_finite_t: t }));
        }
        let step = match variant {
            SgdVariant::Plain => g * gamma,
            SgdVariant::Normalized => {
                if gn == 0.0 {
                    continue;
                }
                g * (gamma / gn)
            }
            SgdVariant::Momentum { mu } => {
                let m = match momentum.take() {
                    None => g,
                    Some(prev) => prev * (1.0 - mu) + g * mu,
                };
                let mn = norm(&m);
                let step = if mn == 0.0 { None } else { Some(&m * (gamma / mn)) };
                momentum = Some(m);
                match step {
                    Some(s) => s,
                    None => continue,
                }
            }
            SgdVariant::Clipped { clip } => g * (gamma / gn.max(clip)),
        };
        w -= &step;
    }
    let samples = rec.samples();
    let status = if rec.visit(iterations, &w, samples, None, None) {
        RunStatus::Completed
    } else {
        RunStatus::Diverged {
            last_finite_t: iterations,
        }
    };
    Ok(rec.finish(&w, status))
}

/// Normalized SPIDER parameters. `iterations` must be a multiple of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpiderConfig {
    pub iterations: usize,
    /// Epoch length.
    pub q: usize,
    /// Anchor batch size `B`.
    pub big_batch: usize,
    /// Correction batch size `B'`.
    pub small_batch: usize,
    pub gamma: f64,
}

impl SpiderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.iterations == 0 || !self.iterations.is_multiple_of(self.q) {
            return Err(Error::Argument(format!(
                "iterations ({}) must be a positive multiple of q ({})",
                self.iterations, self.q
            )));
        }
        if self.small_batch == 0 || self.big_batch < self.small_batch {
            return Err(Error::Argument(format!(
                "batch sizes must satisfy B >= B' >= 1, got B={} B'={}",
                self.big_batch, self.small_batch
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Argument(format!("gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn epochs(&self) -> usize {
        self.iterations / self.q
    }

    /// Per-sample gradient evaluations of a full run: `K (B + (q - 1) B')`.
    pub fn sample_budget(&self) -> u64 {
        (self.epochs() * (self.big_batch + (self.q - 1) * self.small_batch)) as u64
    }
}

/// Recursive estimator update `v + grad f_S(w_new) - grad f_S(w_old)`.
pub fn spider_correction(
    f: &dyn Objective,
    w_new: &Vector,
    w_old: &Vector,
    v_old: &Vector,
    batch: &[usize],
) -> Result<Vector> {
    Ok(v_old + &f.batch_grad_diff(w_new, w_old, batch)?)
}

/// Normalized SPIDER: an anchor batch gradient every `q` iterations,
/// recursive corrections in between, and steps of length exactly `gamma`.
/// Records carry the estimator error `||v_t - grad f(w_t)||`.
pub fn spider(f: &dyn Objective, w0: &Vector, cfg: &SpiderConfig, opts: &RunOptions) -> Result<RunTrace> {
    cfg.validate()?;
    check_start(f, w0, cfg.iterations)?;
    let n = f.sample_count();
    let mut rng = RngStream::new(opts.seed, BATCH);
    let name = format!("spider(q={}, B={}, B'={})", cfg.q, cfg.big_batch, cfg.small_batch);
    let mut rec = Recorder::new(f, opts, &name, cfg.iterations)?;
    let mut w = w0.clone();
    let mut w_prev = w0.clone();
    let mut v = Vector::zeros(f.dim());
    for t in 0..cfg.iterations {
        let samples = rec.samples();
        v = if t % cfg.q == 0 {
            let idx = draw(&mut rng, n, cfg.big_batch, opts)?;
            f.batch_grad(&w, &idx)?
        } else {
            let idx = draw(&mut rng, n, cfg.small_batch, opts)?;
            spider_correction(f, &w, &w_prev, &v, &idx)?
        };
        if !all_finite(&v) || !rec.visit(t, &w, samples, None, Some(&v)) {
            return Ok(rec.finish(&w, RunStatus::Diverged { last_finite_t: t }));
        }
        w_prev.assign(&w);
        let vn = norm(&v);
        if vn > 0.0 {
            w.scaled_add(-cfg.gamma / vn, &v);
        }
    }
    let samples = rec.samples();
    let status = if rec.visit(cfg.iterations, &w, samples, None, None) {
        RunStatus::Completed
    } else {
        RunStatus::Diverged {
            last_finite_t: cfg.iterations,
        }
    };
    Ok(rec.finish(&w, status))
}
