//! Sampled verifiers for the smoothness classes and their consequences.
//!
//! Each check evaluates a one-sided inequality `lhs <= rhs` over a set of
//! sampled pairs and reports the worst ratio `lhs / rhs` together with the
//! pair attaining it, so a failure always comes with an explicit witness.
//! Segment maxima are taken over a finite grid of `theta`, which can only
//! underestimate the true maximum: a pass on the grid is a pass for the
//! continuous condition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{derive_det_constants, derive_stoch_constants};
use crate::error::{Error, Result};
use crate::linalg::{distance, lerp, norm, pow0};
use crate::objectives::Objective;
use crate::rng::RngStream;
use crate::types::{NoiseSpec, SmoothnessSpec, Vector};

mod envelope;
mod sampler;

pub use sampler::{PairSampler, PairSource, Region};

/// Pairs closer than this are skipped by the ratio checks.
pub const MIN_PAIR_DISTANCE: f64 = 1e-12;
pub const DEFAULT_RESOLUTION: usize = 129;
/// Inflation applied by [`fit_smoothness`].
pub const FIT_INFLATION: f64 = 1.05;
const POWER_ITERATIONS: usize = 200;

/// How the segment term `max_theta ||grad f(w_theta)||^alpha` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentRule {
    /// Maximum over the grid.
    Max,
    /// Trapezoid rule for `int_0^1 ||grad f(w_theta)||^alpha dtheta`.
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentGrid {
    resolution: usize,
    rule: SegmentRule,
}

impl Default for SegmentGrid {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            rule: SegmentRule::Max,
        }
    }
}

impl SegmentGrid {
    /// `resolution` counts the grid points including both endpoints.
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Argument(format!(
                "segment grid needs at least 2 points, got {resolution}"
            )));
        }
        Ok(Self {
            resolution,
            rule: SegmentRule::Max,
        })
    }

    pub fn with_rule(self, rule: SegmentRule) -> Self {
        Self { rule, ..self }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn rule(&self) -> SegmentRule {
        self.rule
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 / (self.resolution - 1) as f64
    }

    /// Applies the grid rule to `||grad(w_theta)||^alpha` on the segment.
    fn reduce(&self, grad: impl Fn(&Vector) -> Vector, w: &Vector, wp: &Vector, alpha: f64) -> f64 {
        let vals = (0..self.resolution).map(|k| pow0(norm(&grad(&lerp(w, wp, self.theta(k)))), alpha));
        match self.rule {
            SegmentRule::Max => vals.fold(0.0, f64::max),
            SegmentRule::Integral => {
                let last = self.resolution - 1;
                let h = 1.0 / last as f64;
                vals.enumerate()
                    .map(|(k, v)| if k == 0 || k == last { 0.5 * v } else { v })
                    .sum::<f64>()
                    * h
            }
        }
    }
}

/// `max_theta ||grad f(theta w' + (1 - theta) w)||^alpha` over the grid.
pub fn segment_grad_max(f: &dyn Objective, w: &Vector, wp: &Vector, grid: &SegmentGrid, alpha: f64) -> f64 {
    grid.with_rule(SegmentRule::Max).reduce(|x| f.grad(x), w, wp, alpha)
}

/// Trapezoid approximation of `int_0^1 ||grad f(w_theta)||^alpha dtheta`.
pub fn segment_grad_integral(
    f: &dyn Objective,
    w: &Vector,
    wp: &Vector,
    grid: &SegmentGrid,
    alpha: f64,
) -> f64 {
    grid.with_rule(SegmentRule::Integral).reduce(|x| f.grad(x), w, wp, alpha)
}

/// Outcome of a sampled inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub pairs_tested: usize,
    /// Largest `lhs / rhs` over tested pairs.
    pub worst_ratio: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub passed: bool,
    pub tol: f64,
    pub violations: usize,
    pub grid_resolution: Option<usize>,
    pub seed: Option<u64>,
    /// Smallest normalized slack `(rhs - lhs) / scale` (descent checks only).
    pub worst_slack: Option<f64>,
    pub warnings: Vec<String>,
}

struct PairEval {
    ratio: f64,
    slack: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if rhs <= 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

struct Collected {
    tested: usize,
    worst: f64,
    worst_idx: Option<usize>,
    worst_slack: f64,
    slack_idx: Option<usize>,
    violations: usize,
}

/// Evaluates pairs in parallel, then reduces in index order.
fn collect(
    pairs: &[(Vector, Vector)],
    tol: f64,
    by_slack: bool,
    eval: impl Fn(&Vector, &Vector) -> Option<PairEval> + Sync,
) -> Collected {
    let evals: Vec<Option<PairEval>> = pairs.par_iter().map(|(w, wp)| eval(w, wp)).collect();
    summarize(&evals, tol, by_slack)
}

/// A `NaN` ratio or slack counts as a violation.
fn summarize(evals: &[Option<PairEval>], tol: f64, by_slack: bool) -> Collected {
    let mut out = Collected {
        tested: 0,
        worst: 0.0,
        worst_idx: None,
        worst_slack: f64::INFINITY,
        slack_idx: None,
        violations: 0,
    };
    for (i, e) in evals.iter().enumerate() {
        let Some(e) = e else { continue };
        out.tested += 1;
        let r = if e.ratio.is_nan() { f64::INFINITY } else { e.ratio };
        let s = if e.slack.is_nan() { f64::NEG_INFINITY } else { e.slack };
        let bad = if by_slack { s < -tol } else { r > 1.0 + tol };
        if bad {
            out.violations += 1;
        }
        if out.worst_idx.is_none() || r > out.worst {
            out.worst = r;
            out.worst_idx = Some(i);
        }
        if out.slack_idx.is_none() || s < out.worst_slack {
            out.worst_slack = s;
            out.slack_idx = Some(i);
        }
    }
    out
}

fn report(
    check: &str,
    pairs: &[(Vector, Vector)],
    c: Collected,
    tol: f64,
    by_slack: bool,
    grid: Option<&SegmentGrid>,
    seed: Option<u64>,
) -> CheckReport {
    let idx = if by_slack { c.slack_idx } else { c.worst_idx };
    CheckReport {
        check: check.to_owned(),
        pairs_tested: c.tested,
        worst_ratio: c.worst,
        worst_pair: idx.map(|i| (pairs[i].0.to_vec(), pairs[i].1.to_vec())),
        passed: c.violations == 0,
        tol,
        violations: c.violations,
        grid_resolution: grid.map(SegmentGrid::resolution),
        seed,
        worst_slack: by_slack.then_some(c.worst_slack),
        warnings: Vec::new(),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("tolerance must be >= 0, got {tol}")))
    }
}

/// Symmetric condition:
/// `||grad f(w') - grad f(w)|| <= (L0 + L1 * seg(w, w')) ||w' - w||`,
/// where `seg` is the grid reduction of `||grad f(w_theta)||^alpha`.
pub fn check_sym_membership(
    f: &dyn Objective,
    spec: &SmoothnessSpec,
    pairs: &(impl PairSource + ?Sized),
    grid: &SegmentGrid,
    tol: f64,
) -> Result<CheckReport> {
    check_tol(tol)?;
    let list = pairs.pairs();
    let c = collect(&list, tol, false, |w, wp| {
        let dist = distance(w, wp);
        if dist < MIN_PAIR_DISTANCE {
            return None;
        }
        let lhs = norm(&(f.grad(wp) - f.grad(w)));
        let seg = grid.reduce(|x| f.grad(x), w, wp, spec.alpha);
        let rhs = (spec.l0 + spec.l1 * seg) * dist;
        Some(PairEval {
            ratio: ratio(lhs, rhs),
            slack: rhs - lhs,
        })
    });
    Ok(report("sym_membership", &list, c, tol, false, Some(grid), pairs.seed()))
}

/// Asymmetric condition `||grad f(w') - grad f(w)|| <= (L0 + L1 ||grad f(w')||) ||w' - w||`,
/// tested in both orientations of every pair.
pub fn check_asym_membership(
    f: &dyn Objective,
    l0: f64,
    l1: f64,
    pairs: &(impl PairSource + ?Sized),
    tol: f64,
) -> Result<CheckReport> {
    check_tol(tol)?;
    let list = pairs.pairs();
    let c = collect(&list, tol, false, |w, wp| {
        let dist = distance(w, wp);
        if dist < MIN_PAIR_DISTANCE {
            return None;
        }
        let (g, gp) = (f.grad(w), f.grad(wp));
        let lhs = norm(&(&gp - &g));
        let forward = (l0 + l1 * norm(&gp)) * dist;
        let backward = (l0 + l1 * norm(&g)) * dist;
        let rhs = forward.min(backward);
        Some(PairEval {
            ratio: ratio(lhs, rhs),
            slack: rhs - lhs,
        })
    });
    Ok(report("asym_membership", &list, c, tol, false, None, pairs.seed()))
}

/// Spectral norm of the Hessian at `w` by power iteration on central
/// finite-difference Hessian-vector products. Returns the estimate and
/// whether it converged.
pub fn hessian_norm_fd(f: &dyn Objective, w: &Vector, step: f64, rng: &mut RngStream) -> (f64, bool) {
    let hvp = |v: &Vector| (f.grad(&(w + &(v * step))) - f.grad(&(w - &(v * step)))) / (2.0 * step);
    let mut v = Vector::from(rng.normal_vec(w.len(), 0.0, 1.0));
    let n = norm(&v);
    if n == 0.0 {
        v[0] = 1.0;
    } else {
        v /= n;
    }
    let mut est = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let hv = hvp(&v);
        let next = norm(&hv);
        if next == 0.0 {
            return (0.0, true);
        }
        v = hv / next;
        if (next - est).abs() <= 1e-10 * next {
            return (next, true);
        }
        est = next;
    }
    (est, false)
}

/// Hessian condition `||hess f(w)|| <= L0 + L1 ||grad f(w)||` at each point.
///
/// `fd_step = None` uses `1e-4 (1 + ||w||)`.
pub fn check_hessian_membership(
    f: &dyn Objective,
    l0: f64,
    l1: f64,
    points: &[Vector],
    fd_step: Option<f64>,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    check_tol(tol)?;
    let root = RngStream::new(seed, "hessian");
    let evals: Vec<(PairEval, bool)> = points
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let h = fd_step.unwrap_or(1e-4 * (1.0 + norm(w)));
            let mut rng = root.child(&i.to_string());
            let (hn, converged) = hessian_norm_fd(f, w, h, &mut rng);
            let rhs = l0 + l1 * norm(&f.grad(w));
            let e = PairEval {
                ratio: ratio(hn, rhs),
                slack: rhs - hn,
            };
            (e, converged)
        })
        .collect();
    let warnings: Vec<String> = evals
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.1)
        .map(|(i, _)| format!("power iteration did not converge in {POWER_ITERATIONS} steps at point {i}"))
        .collect();
    let evals: Vec<Option<PairEval>> = evals.into_iter().map(|(e, _)| Some(e)).collect();
    let pairs: Vec<(Vector, Vector)> = points.iter().map(|w| (w.clone(), w.clone())).collect();
    let c = summarize(&evals, tol, false);
    let mut rep = report("hessian_membership", &pairs, c, tol, false, None, Some(seed));
    rep.warnings = warnings;
    Ok(rep)
}

/// Modulus `M(g, r)` such that `||grad f(w') - grad f(w)|| <= r * M` with
/// `g = ||grad f(w)||` and `r = ||w' - w||`, plus the tail form used by the
/// descent lemma.
#[derive(Debug, Clone, Copy)]
enum Modulus {
    /// `alpha = 0`: plain `L`-smoothness with `L = L0 + L1`.
    Lipschitz(f64),
    Poly {
        k0: f64,
        k1: f64,
        k2: f64,
        alpha: f64,
    },
    Exp {
        l0: f64,
        l1: f64,
    },
}

impl Modulus {
    fn from_spec(spec: &SmoothnessSpec) -> Result<Self> {
        if spec.alpha == 0.0 {
            Ok(Modulus::Lipschitz(spec.l0 + spec.l1))
        } else if spec.alpha == 1.0 {
            Ok(Modulus::Exp {
                l0: spec.l0,
                l1: spec.l1,
            })
        } else {
            let k = derive_det_constants(spec)?;
            Ok(Modulus::Poly {
                k0: k.k0,
                k1: k.k1,
                k2: k.k2,
                alpha: spec.alpha,
            })
        }
    }

    fn gradient(&self, g: f64, r: f64) -> f64 {
        match *self {
            Modulus::Lipschitz(l) => l,
            Modulus::Poly { k0, k1, k2, alpha } => {
                k0 + k1 * g.powf(alpha) + k2 * r.powf(alpha / (1.0 - alpha))
            }
            Modulus::Exp { l0, l1 } => (l0 + l1 * g) * (l1 * r).exp(),
        }
    }

    /// Curvature term of the descent lemma; the polynomial tail doubles.
    fn descent(&self, g: f64, r: f64) -> f64 {
        match *self {
            Modulus::Poly { k0, k1, k2, alpha } => {
                k0 + k1 * g.powf(alpha) + 2.0 * k2 * r.powf(alpha / (1.0 - alpha))
            }
            other => other.gradient(g, r),
        }
    }
}

/// Equivalent bounded-difference form of the symmetric condition, tested in
/// both orientations: for `alpha` in `(0, 1)`,
/// `||grad f(w') - grad f(w)|| <= r (K0 + K1 ||grad f(w)||^alpha + K2 r^(alpha/(1-alpha)))`;
/// for `alpha = 1`, `<= r (L0 + L1 ||grad f(w)||) exp(L1 r)`; for
/// `alpha = 0`, `<= (L0 + L1) r`.
pub fn check_pair_bound(
    f: &dyn Objective,
    spec: &SmoothnessSpec,
    pairs: &(impl PairSource + ?Sized),
    tol: f64,
) -> Result<CheckReport> {
    check_tol(tol)?;
    let modulus = Modulus::from_spec(spec)?;
    let list = pairs.pairs();
    let c = collect(&list, tol, false, |w, wp| {
        let r = distance(w, wp);
        let (g, gp) = (f.grad(w), f.grad(wp));
        let lhs = norm(&(&gp - &g));
        let rhs = r * modulus.gradient(norm(&g), r).min(modulus.gradient(norm(&gp), r));
        Some(PairEval {
            ratio: ratio(lhs, rhs),
            slack: rhs - lhs,
        })
    });
    Ok(report("pair_bound", &list, c, tol, false, None, pairs.seed()))
}

/// Descent lemma `f(w') <= f(w) + <grad f(w), w' - w> + r^2 M / 2`, both
/// orientations. Passes when the slack divided by `1 + |f(w)|` stays above
/// `-tol`; `worst_ratio` is the largest curvature ratio
/// `(f(w') - f(w) - <grad f(w), w' - w>) / (r^2 M / 2)`.
pub fn check_descent_lemma(
    f: &dyn Objective,
    spec: &SmoothnessSpec,
    pairs: &(impl PairSource + ?Sized),
    tol: f64,
) -> Result<CheckReport> {
    check_tol(tol)?;
    let modulus = Modulus::from_spec(spec)?;
    let list = pairs.pairs();
    let one_way = |w: &Vector, wp: &Vector| {
        let r = distance(w, wp);
        let g = f.grad(w);
        let fw = f.value(w);
        let lhs = f.value(wp) - fw - g.dot(&(wp - w));
        let bound = 0.5 * r * r * modulus.descent(norm(&g), r);
        PairEval {
            ratio: ratio(lhs, bound),
            slack: (bound - lhs) / (1.0 + fw.abs()),
        }
    };
    let c = collect(&list, tol, true, |w, wp| {
        let a = one_way(w, wp);
        let b = one_way(wp, w);
        Some(PairEval {
            ratio: a.ratio.max(b.ratio),
            slack: a.slack.min(b.slack),
        })
    });
    Ok(report("descent_lemma", &list, c, tol, true, None, pairs.seed()))
}

/// Result of [`check_expected_sym`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedReport {
    /// Mean-square condition with per-sample segment terms.
    pub definition: CheckReport,
    /// Closed-form consequence with the stochastic constants (absent for
    /// `alpha = 0`).
    pub consequence: Option<CheckReport>,
}

impl ExpectedReport {
    pub fn passed(&self) -> bool {
        self.definition.passed && self.consequence.as_ref().is_none_or(|c| c.passed)
    }
}

/// Expected symmetric condition over a finite sum, computed exactly:
/// `mean_i ||grad f_i(w') - grad f_i(w)||^2 <= r^2 mean_i (L0 + L1 seg_i)^2`.
///
/// The consequence check is, for `alpha` in `(0, 1)`,
/// `lhs <= r^2 (Kbar0 + Kbar1 mean_i ||grad f_i(w)||^alpha + Kbar2 r^(alpha/(1-alpha)))^2`
/// and for `alpha = 1`,
/// `lhs <= 2 r^2 (L0^2 + 2 L1^2 mean_i ||grad f_i(w)||^2) exp(12 L1^2 r^2)`,
/// both orientations.
pub fn check_expected_sym(
    f: &dyn Objective,
    spec: &SmoothnessSpec,
    pairs: &(impl PairSource + ?Sized),
    grid: &SegmentGrid,
    tol: f64,
) -> Result<ExpectedReport> {
    check_tol(tol)?;
    let list = pairs.pairs();
    let n = f.sample_count();
    let alpha = spec.alpha;
    let kbar = if spec.is_interior() {
        Some(derive_stoch_constants(spec)?)
    } else {
        None
    };
    let sg = |x: &Vector, i: usize| f.sample_grad_uncounted(x, i).expect("index in range");

    let evals: Vec<Option<(PairEval, PairEval)>> = list
        .par_iter()
        .map(|(w, wp)| {
            let r = distance(w, wp);
            if r < MIN_PAIR_DISTANCE {
                return None;
            }
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            let (mut ma, mut ma_p, mut m2, mut m2_p) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                let (g, gp) = (sg(w, i), sg(wp, i));
                lhs += (&gp - &g).mapv(|v| v * v).sum();
                let seg = grid.reduce(|x| sg(x, i), w, wp, alpha);
                rhs += (spec.l0 + spec.l1 * seg).powi(2);
                let (gn, gpn) = (norm(&g), norm(&gp));
                ma += pow0(gn, alpha);
                ma_p += pow0(gpn, alpha);
                m2 += gn * gn;
                m2_p += gpn * gpn;
            }
            let nf = n as f64;
            let (lhs, rhs) = (lhs / nf, r * r * rhs / nf);
            let def = PairEval {
                ratio: ratio(lhs, rhs),
                slack: rhs - lhs,
            };
            let cons_rhs = |moment_a: f64, moment_2: f64| match kbar {
                Some(k) => {
                    let tail = r.powf(alpha / (1.0 - alpha));
                    r * r * (k.kbar0 + k.kbar1 * moment_a / nf + k.kbar2 * tail).powi(2)
                }
                None => {
                    let (l0, l1) = (spec.l0, spec.l1);
                    2.0 * r * r * (l0 * l0 + 2.0 * l1 * l1 * moment_2 / nf) * (12.0 * l1 * l1 * r * r).exp()
                }
            };
            let cr = cons_rhs(ma, m2).min(cons_rhs(ma_p, m2_p));
            let cons = PairEval {
                ratio: ratio(lhs, cr),
                slack: cr - lhs,
            };
            Some((def, cons))
        })
        .collect();

    let (defs, conss): (Vec<_>, Vec<_>) = evals
        .into_iter()
        .map(|e| match e {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        })
        .unzip();
    let seed = pairs.seed();
    let definition = report(
        "expected_sym",
        &list,
        summarize(&defs, tol, false),
        tol,
        false,
        Some(grid),
        seed,
    );
    let consequence = (alpha > 0.0).then(|| {
        report(
            "expected_sym_consequence",
            &list,
            summarize(&conss, tol, false),
            tol,
            false,
            None,
            seed,
        )
    });
    Ok(ExpectedReport {
        definition,
        consequence,
    })
}

/// Exact finite-sum variance `mean_i ||grad f_i(w) - grad f(w)||^2` and
/// the full gradient norm at `w`.
pub fn gradient_variance(f: &dyn Objective, w: &Vector) -> (f64, f64) {
    let g = f.grad(w);
    let n = f.sample_count();
    let v = (0..n)
        .map(|i| {
            let gi = f.sample_grad_uncounted(w, i).expect("index in range");
            (&gi - &g).mapv(|x| x * x).sum()
        })
        .sum::<f64>()
        / n as f64;
    (v, norm(&g))
}

/// Exact finite-sum moment `mean_i ||grad f_i(w)||^tau`.
pub fn gradient_moment(f: &dyn Objective, w: &Vector, tau: f64) -> f64 {
    let n = f.sample_count();
    (0..n)
        .map(|i| pow0(norm(&f.sample_grad_uncounted(w, i).expect("index in range")), tau))
        .sum::<f64>()
        / n as f64
}

/// Smallest `(Gamma^2, Lambda^2)` with `Gamma^2 ||grad f||^2 + Lambda^2 >= variance`
/// at every probe (minimizing the summed bound), each scaled by `safety`.
pub fn estimate_noise(f: &dyn Objective, probes: &[Vector], safety: f64) -> Result<NoiseSpec> {
    if probes.is_empty() {
        return Err(Error::Argument("noise estimation needs at least one probe".into()));
    }
    if !(safety >= 1.0) {
        return Err(Error::Argument(format!("safety must be >= 1, got {safety}")));
    }
    let pts: Vec<(f64, f64)> = probes
        .par_iter()
        .map(|w| {
            let (v, g) = gradient_variance(f, w);
            (g * g, v)
        })
        .collect();
    let (a, b) = envelope::fit_envelope(&pts);
    NoiseSpec::new((a * safety).sqrt(), (b * safety).sqrt())
}

/// Smallest `(L0, L1)` with `L0 + L1 seg >= ||grad f(w') - grad f(w)|| / ||w' - w||`
/// on every sampled pair, inflated by [`FIT_INFLATION`] and floored at
/// `1e-12` so the result is a valid spec.
pub fn fit_smoothness(
    f: &dyn Objective,
    alpha: f64,
    pairs: &(impl PairSource + ?Sized),
    grid: &SegmentGrid,
) -> Result<SmoothnessSpec> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Argument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let list = pairs.pairs();
    let pts: Vec<(f64, f64)> = list
        .par_iter()
        .filter_map(|(w, wp)| {
            let r = distance(w, wp);
            if r < MIN_PAIR_DISTANCE {
                return None;
            }
            let q = norm(&(f.grad(wp) - f.grad(w))) / r;
            Some((grid.reduce(|x| f.grad(x), w, wp, alpha), q))
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::Argument("all sampled pairs are degenerate".into()));
    }
    let (l1, l0) = envelope::fit_envelope(&pts);
    SmoothnessSpec::new(
        alpha,
        (l0 * FIT_INFLATION).max(1e-12),
        (l1 * FIT_INFLATION).max(1e-12),
    )
}
