use serde::{Deserialize, Serialize};

use super::SpiderConfig;
use crate::constants::{derive_det_constants, derive_stoch_constants};
use crate::error::{Error, Result};
use crate::linalg::{pow0, robust_ceil};
use crate::objectives::{make_exponential_witness, make_polynomial_witness, Objective};
use crate::types::{NoiseSpec, SmoothnessSpec, Vector};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("target accuracy must lie in (0, 1), got {eps}")))
    }
}

/// Step size and iteration count for beta-normalized GD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetSchedule {
    pub gamma: f64,
    pub iterations: usize,
}

/// For `alpha` in `(0, 1)` and `beta` in `[alpha, 1]`:
/// `gamma = eps^beta / (12 (K0 + K1 + 2 K2) + 1)`. For `alpha = 1` (which
/// requires `beta = 1`): `gamma = eps / (4 L0 + 1)`. In both cases
/// `T = ceil(4 / (gamma eps^(2 - beta)))`.
pub fn theoretical_gamma_det(spec: &SmoothnessSpec, eps: f64, beta: f64) -> Result<DetSchedule> {
    check_eps(eps)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Argument(format!("beta must lie in [0, 1], got {beta}")));
    }
    if beta < spec.alpha {
        return Err(Error::Argument(format!(
            "beta = {beta} < alpha = {}: under-normalized GD can diverge on this class \
             (see divergence_certificate)",
            spec.alpha
        )));
    }
    let gamma = if spec.alpha == 1.0 {
        eps / (4.0 * spec.l0 + 1.0)
    } else {
        let k = derive_det_constants(spec)?;
        eps.powf(beta) / (12.0 * (k.k0 + k.k1 + 2.0 * k.k2) + 1.0)
    };
    let iterations = robust_ceil(4.0 / (gamma * eps.powf(2.0 - beta)));
    Ok(DetSchedule {
        gamma,
        iterations: iterations as usize,
    })
}

/// Theoretical SPIDER setup with any adjustments that were needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderPlan {
    pub config: SpiderConfig,
    pub epochs: usize,
    pub warnings: Vec<String>,
}

/// `q = ceil(1/eps)`, `B = ceil(max(576 Lambda^2, 2304 Gamma^2) / eps^2)`,
/// `B' = ceil(2304 / eps)`, and
/// `gamma = eps / (2 Kbar0 + 4 Kbar2 + 2 Kbar1 (Lambda^alpha + Gamma^alpha + 1) + 1)`
/// for `alpha` in `(0, 1)` or
/// `gamma = eps / (5 L1 sqrt(Gamma^2 + 1) + 8 sqrt(L0^2 + 2 L1^2 Lambda^2))`
/// for `alpha = 1`.
///
/// The epoch count `K` is the smallest with `16 gap / (q K gamma) <= eps`.
/// `B` is raised to `B'` when smaller (batches obey `B >= B'`), and with
/// `sample_count = Some(n)` both are clamped to `n`; each adjustment is
/// reported in `warnings`.
pub fn theoretical_spider_hyperparams(
    spec: &SmoothnessSpec,
    noise: &NoiseSpec,
    eps: f64,
    gap: f64,
    sample_count: Option<usize>,
) -> Result<SpiderPlan> {
    check_eps(eps)?;
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::Argument(format!("objective gap must be finite and >= 0, got {gap}")));
    }
    let (g2, l2) = (noise.gamma * noise.gamma, noise.lambda * noise.lambda);
    let q = robust_ceil(1.0 / eps) as usize;
    let mut big = robust_ceil((576.0 * l2).max(2304.0 * g2) / (eps * eps)) as usize;
    let mut small = robust_ceil(2304.0 / eps) as usize;
    let gamma = if spec.alpha == 1.0 {
        eps / (5.0 * spec.l1 * (g2 + 1.0).sqrt()
            + 8.0 * (spec.l0 * spec.l0 + 2.0 * spec.l1 * spec.l1 * l2).sqrt())
    } else {
        let k = derive_stoch_constants(spec)?;
        let a = spec.alpha;
        eps / (2.0 * k.kbar0
            + 4.0 * k.kbar2
            + 2.0 * k.kbar1 * (noise.lambda.powf(a) + noise.gamma.powf(a) + 1.0)
            + 1.0)
    };
    let mut warnings = Vec::new();
    if big < small {
        warnings.push(format!("B = {big} raised to B' = {small}"));
        big = small;
    }
    if let Some(n) = sample_count {
        if big > n {
            warnings.push(format!("B = {big} clamped to sample count {n}"));
            big = n;
        }
        if small > n {
            warnings.push(format!("B' = {small} clamped to sample count {n}"));
            small = n;
        }
    }
    let needed = 16.0 * gap / (gamma * eps);
    let epochs = (robust_ceil(needed / q as f64) as usize).max(1);
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(SpiderPlan {
        config: SpiderConfig {
            iterations: q * epochs,
            q,
            big_batch: big,
            small_batch: small,
            gamma,
        },
        epochs,
        warnings,
    })
}

/// Outcome of [`divergence_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCertificate {
    pub certified: bool,
    /// Doubling threshold `C`; every `|w| > C` at least doubles in one step.
    pub threshold: f64,
    /// `|w_t|` for `t = 0..=T` (shorter if the iterate overflowed).
    pub trajectory: Vec<f64>,
    /// First `t` with `|w_{t+1}| <= 2 |w_t|`, if any.
    pub first_failure: Option<usize>,
}

/// Log of `2 sinh r`, stable for large `r`.
fn ln_two_sinh(r: f64) -> f64 {
    r + (-(-2.0 * r).exp()).ln_1p()
}

/// Doubling threshold for beta-GD with `beta < alpha`.
///
/// For `alpha` in `(0, 1)`, on the one-dimensional polynomial witness,
/// `C = (3 (1 - alpha) / (gamma (2 - alpha)))^((1 - alpha) / (alpha - beta))`.
/// For `alpha = 1`, on the exponential witness, `C` is the largest `r` with
/// `gamma (2 sinh r)^(1 - beta) <= 3 r`, found by scanning and bisection.
pub fn certificate_threshold(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Argument(format!("gamma must be > 0, got {gamma}")));
    }
    if !(0.0..=1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::Argument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(beta >= 0.0 && beta < alpha) {
        return Err(Error::Argument(format!(
            "the certificate needs 0 <= beta < alpha, got beta = {beta}, alpha = {alpha}"
        )));
    }
    if alpha < 1.0 {
        return Ok((3.0 * (1.0 - alpha) / (gamma * (2.0 - alpha))).powf((1.0 - alpha) / (alpha - beta)));
    }
    // h(r) > 0 iff the step from r more than doubles |w|.
    let h = |r: f64| gamma.ln() + (1.0 - beta) * ln_two_sinh(r) - (3.0 * r).ln();
    // beyond 1/(1-beta), h is increasing, so once positive it stays positive
    let mut hi = 1.0 / (1.0 - beta) + 1.0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
    }
    let steps = 100_000;
    let mut last_bad = None;
    for k in 1..=steps {
        let r = hi * k as f64 / steps as f64;
        if h(r) <= 0.0 {
            last_bad = Some(r);
        }
    }
    let Some(mut lo) = last_bad else {
        return Ok(0.0);
    };
    let mut up = lo + hi / steps as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    Ok(lo)
}

/// Runs beta-GD with `beta < alpha` from `w0_abs > C` on the matching
/// one-dimensional witness and certifies divergence when `|w|` at least
/// doubles at every step.
pub fn divergence_certificate(
    alpha: f64,
    beta: f64,
    gamma: f64,
    w0_abs: f64,
    iterations: usize,
) -> Result<DivergenceCertificate> {
    let threshold = certificate_threshold(alpha, beta, gamma)?;
    if !(w0_abs > threshold) {
        return Err(Error::Argument(format!(
            "|w0| = {w0_abs} must exceed the doubling threshold C = {threshold}"
        )));
    }
    let f: Box<dyn Objective> = if alpha < 1.0 {
        Box::new(make_polynomial_witness(alpha, 1)?)
    } else {
        Box::new(make_exponential_witness(1)?)
    };
    // |w| only: the witness value overflows long before the iterate does
    let mut w = Vector::from(vec![w0_abs]);
    let mut trajectory = vec![w0_abs];
    for _ in 0..iterations {
        let g = f.grad(&w);
        let gn = g[0].abs();
        if gn == 0.0 {
            break;
        }
        w = &w - &(g * (gamma / pow0(gn, beta)));
        let r = w[0].abs();
        if !r.is_finite() {
            break;
        }
        trajectory.push(r);
    }
    let first_failure = trajectory.windows(2).position(|p| !(p[1] > 2.0 * p[0]));
    let certified = first_failure.is_none() && trajectory.len() == iterations + 1;
    Ok(DivergenceCertificate {
        certified,
        threshold,
        trajectory,
        first_failure,
    })
}
