use super::{check_gamma, check_start, GradZeroPolicy, Recorder, RunOptions, RunStatus, RunTrace};
use crate::error::{Error, Result};
use crate::linalg::{norm, pow0};
use crate::objectives::Objective;
use crate::types::Vector;

/// Full-gradient loop; `step(g, ||g||)` returns the displacement to subtract.
fn run_full_gradient(
    f: &dyn Objective,
    w0: &Vector,
    iterations: usize,
    opts: &RunOptions,
    name: &str,
    step: impl Fn(&Vector, f64) -> Vector,
) -> Result<RunTrace> {
    check_start(f, w0, iterations)?;
    let mut rec = Recorder::new(f, opts, name, iterations)?;
    let mut w = w0.clone();
    for t in 0..iterations {
        let samples = rec.samples();
        let g = f.grad_counted(&w);
        let gn = norm(&g);
        if !gn.is_finite() || !rec.visit(t, &w, samples, Some(gn), None) {
            return Ok(rec.finish(&w, RunStatus::Diverged { last_finite_t: t }));
        }
        if gn == 0.0 {
            match opts.grad_zero_policy {
                GradZeroPolicy::Halt => {
                    rec.pad(t, &w);
                    return Ok(rec.finish(&w, RunStatus::Halted { t }));
                }
                GradZeroPolicy::ZeroStep => continue,
            }
        }
        w -= &step(&g, gn);
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

/// `w_{t+1} = w_t - gamma grad f(w_t) / ||grad f(w_t)||^beta`.
///
/// `beta = 0` is plain gradient descent and `beta = 1` normalized GD.
pub fn beta_gd(
    f: &dyn Objective,
    w0: &Vector,
    gamma: f64,
    beta: f64,
    iterations: usize,
    opts: &RunOptions,
) -> Result<RunTrace> {
    check_gamma(gamma)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Argument(format!("beta must lie in [0, 1], got {beta}")));
    }
    let name = format!("beta_gd(beta={beta})");
    run_full_gradient(f, w0, iterations, opts, &name, |g, gn| g * (gamma / pow0(gn, beta)))
}

/// `w_{t+1} = w_t - gamma grad f(w_t) / max(||grad f(w_t)||, clip)`.
pub fn clipped_gd(
    f: &dyn Objective,
    w0: &Vector,
    gamma: f64,
    clip: f64,
    iterations: usize,
    opts: &RunOptions,
) -> Result<RunTrace> {
    check_gamma(gamma)?;
    if !(clip > 0.0 && clip.is_finite()) {
        return Err(Error::Argument(format!("clip threshold must be > 0, got {clip}")));
    }
    let name = format!("clipped_gd(C={clip})");
    run_full_gradient(f, w0, iterations, opts, &name, |g, gn| g * (gamma / gn.max(clip)))
}
