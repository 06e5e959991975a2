//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{dro_small, dro_stencil_crosses_kink, fd_rel_error, median, phase_small};
use gsmooth::harness::{preset, run_checks, run_experiment, write_outputs, ExperimentOutput};
use gsmooth::linalg::norm;
use gsmooth::objectives::{
    make_exponential_witness, make_polynomial_witness, phase_retrieval_smoothness, IdenticalSamples, Objective,
    Quadratic,
};
use gsmooth::optimizers::{
    beta_gd, divergence_certificate, spider, theoretical_gamma_det, theoretical_spider_hyperparams, RunOptions,
    SpiderConfig,
};
use gsmooth::smoothness::{
    check_asym_membership, check_descent_lemma, check_expected_sym, check_pair_bound, check_sym_membership,
    PairSampler, SegmentGrid,
};
use gsmooth::{NoiseSpec, RngStream, SmoothnessSpec, Vector};
use ndarray::Array1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn quartic_spec() -> SmoothnessSpec {
    SmoothnessSpec::new(2.0 / 3.0, 0.01, 4.77).unwrap()
}

fn fd_points(f: &dyn Objective, points: &[Vector]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for w in points {
        let e = fd_rel_error(|v| f.value(v), &f.grad(w), w);
        worst = worst.max(e);
        ensure(e <= 1e-5, || format!("{}: rel error {e:e}", f.name()))?;
    }
    Ok(worst)
}

fn c1_gradients() -> Outcome {
    let ball = |d, r, s| PairSampler::ball(d, r, 100, s).unwrap().points();
    let mut worst: f64 = 0.0;
    worst = worst.max(fd_points(&make_polynomial_witness(2.0 / 3.0, 3).map_err(err)?, &ball(3, 3.0, 1))?);
    worst = worst.max(fd_points(&make_exponential_witness(3).map_err(err)?, &ball(3, 5.0, 2))?);
    worst = worst.max(fd_points(&Quadratic::scaled(4, 2.5), &ball(4, 10.0, 3))?);
    let (f, z0) = phase_small(7);
    let pts: Vec<Vector> = ball(5, 3.0, 4).into_iter().map(|p| p + &z0).collect();
    worst = worst.max(fd_points(&f, &pts)?);
    let dro = dro_small(5);
    let mut rng = RngStream::new(11, "points");
    let (mut pts, mut skipped) = (Vec::new(), 0);
    while pts.len() < 100 {
        let mut w = rng.normal_vec(dro.instance().p(), 0.0, 1.0);
        w.push(rng.normal(2.0, 3.0));
        let w = Array1::from(w);
        if dro_stencil_crosses_kink(dro.instance(), &w) {
            skipped += 1;
        } else {
            pts.push(w);
        }
    }
    worst = worst.max(fd_points(&dro, &pts)?);
    Ok(format!("5 objectives x 100 points, worst rel error {worst:.2e}, {skipped} DRO points at kinks skipped"))
}

fn c2_membership() -> Outcome {
    let f = make_polynomial_witness(2.0 / 3.0, 3).map_err(err)?;
    let pairs = PairSampler::ball(3, 10.0, 1000, 0).map_err(err)?;
    let a = check_sym_membership(&f, &quartic_spec(), &pairs, &SegmentGrid::default(), 0.0).map_err(err)?;
    ensure(a.passed && a.violations == 0, || format!("(a) quartic: {} violations", a.violations))?;

    let e = make_exponential_witness(1).map_err(err)?;
    let rays = PairSampler::ray(1, 30.0, 200, 0).map_err(err)?;
    let b = check_asym_membership(&e, 1e3, 1e3, &rays, 0.0).map_err(err)?;
    let (w, wp) = b.worst_pair.clone().ok_or("(b) no witness pair")?;
    let (w, wp) = (Array1::from(w), Array1::from(wp));
    let lhs = norm(&(e.grad(&wp) - e.grad(&w)));
    let r = norm(&(&wp - &w));
    let rhs = (1e3 + 1e3 * norm(&e.grad(&wp))).min(1e3 + 1e3 * norm(&e.grad(&w))) * r;
    ensure(!b.passed && lhs > rhs, || "(b) exponential witness not refuted".into())?;

    let (inst, _) = gsmooth::harness::phase_desk_instance(0).map_err(err)?;
    let spec = phase_retrieval_smoothness(&inst);
    let pf = gsmooth::objectives::PhaseRetrievalObjective::new(inst);
    let cube = PairSampler::cube(5, 3.0, 1000, 0).map_err(err)?;
    let c = check_expected_sym(&pf, &spec, &cube, &SegmentGrid::default(), 0.0).map_err(err)?;
    ensure(c.passed(), || format!("(c) phase: worst ratio {}", c.definition.worst_ratio))?;
    Ok(format!(
        "(a) worst ratio {:.3}; (b) pair w={}, w'={} gives {:.3e} > {:.3e}; (c) worst ratio {:.3}",
        a.worst_ratio, w[0], wp[0], lhs, rhs, c.definition.worst_ratio
    ))
}

fn c3_pair_bound_descent() -> Outcome {
    let f = make_polynomial_witness(2.0 / 3.0, 3).map_err(err)?;
    let pairs = PairSampler::ball(3, 10.0, 10_000, 0).map_err(err)?;
    let b = check_pair_bound(&f, &quartic_spec(), &pairs, 1e-8).map_err(err)?;
    let d = check_descent_lemma(&f, &quartic_spec(), &pairs, 1e-8).map_err(err)?;
    ensure(b.passed && d.passed, || format!("quartic: bound {} descent {}", b.violations, d.violations))?;
    let e = make_exponential_witness(1).map_err(err)?;
    let spec = SmoothnessSpec::new(1.0, 4.0, 1.0).map_err(err)?;
    let cube = PairSampler::cube(1, 5.0, 10_000, 0).map_err(err)?;
    let eb = check_pair_bound(&e, &spec, &cube, 1e-8).map_err(err)?;
    let ed = check_descent_lemma(&e, &spec, &cube, 1e-8).map_err(err)?;
    ensure(eb.passed && ed.passed, || format!("exp: bound {} descent {}", eb.violations, ed.violations))?;
    Ok(format!(
        "quartic bound ratio {:.3}, slack {:.2e}; exponential bound ratio {:.3}, slack {:.2e}",
        b.worst_ratio,
        d.worst_slack.unwrap(),
        eb.worst_ratio,
        ed.worst_slack.unwrap()
    ))
}

fn c4_beta_gd_rate() -> Outcome {
    let (eps, beta) = (0.2, 2.0 / 3.0);
    let sched = theoretical_gamma_det(&quartic_spec(), eps, beta).map_err(err)?;
    let f = make_polynomial_witness(2.0 / 3.0, 5).map_err(err)?;
    let w0 = Array1::from_elem(5, 1.0);
    let trace = beta_gd(&f, &w0, sched.gamma, beta, sched.iterations, &RunOptions::default()).map_err(err)?;
    let min_g = trace.min_grad_norm();
    ensure(min_g <= eps, || format!("min grad norm {min_g} > {eps}"))?;
    let tail = sched.gamma / 4.0 * eps.powf(2.0 - beta);
    let mut worst = f64::NEG_INFINITY;
    for w in trace.records.windows(2) {
        let lhs = w[1].f_value - w[0].f_value;
        let rhs = -sched.gamma / 2.0 * w[0].grad_norm.powf(2.0 - beta) + tail;
        let excess = (lhs - rhs) / (1.0 + w[0].f_value.abs());
        worst = worst.max(excess);
        ensure(excess <= 1e-12, || format!("sufficient decrease fails at t = {}", w[0].t))?;
    }
    Ok(format!(
        "gamma {:.4e}, T {}, min grad norm {min_g:.4}, worst decrease excess {worst:.2e}",
        sched.gamma, sched.iterations
    ))
}

fn c5_certificate() -> Outcome {
    let cert = divergence_certificate(2.0 / 3.0, 1.0 / 3.0, 0.1, 20.0, 5).map_err(err)?;
    let w5 = cert.trajectory[5];
    ensure(cert.certified && w5 >= 640.0, || format!("certified {} |w_5| = {w5}", cert.certified))?;
    let f = make_polynomial_witness(2.0 / 3.0, 1).map_err(err)?;
    let run = beta_gd(&f, &Array1::from_elem(1, 20.0), 0.1, 2.0 / 3.0, 500, &RunOptions::default()).map_err(err)?;
    ensure(run.diverged().is_none(), || "beta = 2/3 diverged".into())?;
    Ok(format!(
        "C = {}, |w_5| = {w5:.1}; beta = 2/3 ends at |w| = {:.3e}",
        cert.threshold,
        run.last().param_norm
    ))
}

fn c6_spider() -> Outcome {
    let m = run_checks("spider-martingale", None, 0).map_err(err)?;
    ensure(m.passed, || format!("(a) martingale: {}", m.details))?;
    let (f, z0) = common::phase(20, 500, 1);
    let cfg = SpiderConfig { iterations: 100, q: 5, big_batch: 500, small_batch: 50, gamma: 2e-4 };
    let before = f.eval_count();
    let trace = spider(&f, &z0, &cfg, &RunOptions::seeded(1)).map_err(err)?;
    let steps_ok = trace.step_norms.len() == 100 && trace.step_norms.iter().all(|s| (s - 2e-4).abs() <= 1e-15);
    ensure(steps_ok, || "(b) step length differs from gamma".into())?;
    let used = f.eval_count() - before;
    ensure(used == 20 * (500 + 4 * 50) && used == cfg.sample_budget(), || format!("(c) budget {used}"))?;
    let z = IdenticalSamples::new(make_polynomial_witness(2.0 / 3.0, 3).map_err(err)?, 10);
    let zc = SpiderConfig { iterations: 20, q: 5, big_batch: 4, small_batch: 2, gamma: 0.1 };
    let zt = spider(&z, &Array1::from_elem(3, 1.0), &zc, &RunOptions::seeded(2)).map_err(err)?;
    // Exact up to rounding accumulated by the recursive corrections.
    let scale = zt.records.iter().map(|r| r.grad_norm).fold(0.0, f64::max);
    let delta = zt.records.iter().filter_map(|r| r.estimator_error).fold(0.0, f64::max) / scale;
    ensure(delta <= 1e-14, || format!("(d) max delta / max |grad| = {delta:e}"))?;
    Ok(format!(
        "(a) worst z {:.2}; (b) 100 steps of length gamma; (c) {used} samples; (d) max delta / max |grad| {delta:.1e}",
        m.details["worst_z"].as_f64().unwrap_or(f64::NAN)
    ))
}

fn finals(out: &ExperimentOutput, alg: &str) -> Vec<f64> {
    out.final_values(alg)
}

fn c7_orderings() -> Outcome {
    let det = run_experiment(&preset("phase-retrieval-det", true).map_err(err)?).map_err(err)?;
    let beta = median(&finals(&det, "beta_gd_0.667"));
    let gd = median(&finals(&det, "gd"));
    ensure(beta <= gd, || format!("(a) beta-GD median {beta} > GD median {gd}"))?;

    let cfg = preset("phase-retrieval-stoch", true).map_err(err)?;
    let st = run_experiment(&cfg).map_err(err)?;
    let budget = cfg.sample_budget.unwrap();
    ensure(st.runs.iter().all(|r| r.samples == budget), || "(b) unequal sample budgets".into())?;
    let sp = median(&finals(&st, "spider"));
    let mut parts = Vec::new();
    for alg in ["sgd", "normalized_sgd", "momentum_sgd", "clipped_sgd"] {
        let other = median(&finals(&st, alg));
        ensure(sp <= other, || format!("(b) spider median {sp} > {alg} median {other}"))?;
        parts.push(format!("{alg} {other:.5}"));
    }
    Ok(format!(
        "(a) beta-GD {beta:.4} <= GD {gd:.4}; (b) at {budget} samples spider {sp:.5} <= {}",
        parts.join(", ")
    ))
}

fn c8_spider_arithmetic() -> Outcome {
    let spec = SmoothnessSpec::new(2.0 / 3.0, 1.0, 1.0).map_err(err)?;
    let noise = NoiseSpec::new(1.0, 1.0).map_err(err)?;
    let plan = theoretical_spider_hyperparams(&spec, &noise, 0.1, 1.0, None).map_err(err)?;
    let c = plan.config;
    ensure((c.q, c.big_batch, c.small_batch) == (10, 230_400, 23_040), || {
        format!("got q={} B={} B'={}", c.q, c.big_batch, c.small_batch)
    })?;
    Ok("q = 10, B = 230400, B' = 23040".into())
}

fn c9_young_moment() -> Outcome {
    let y = run_checks("young", None, 0).map_err(err)?;
    ensure(y.passed, || format!("young: {}", y.details))?;
    let m = run_checks("moment", None, 0).map_err(err)?;
    ensure(m.passed, || format!("moment: {}", m.details))?;
    Ok(format!("{} Young instances, 0 failures; moment bound at 100 points for 4 exponents", y.details["instances"]))
}

fn strip_wall(text: &str) -> Vec<String> {
    text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_owned()).collect()
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let cfg = preset("phase-retrieval-det", true).map_err(err)?;
    let mut texts = Vec::new();
    for k in 0..2 {
        let out = run_experiment(&cfg).map_err(err)?;
        let (csv, _) = write_outputs(&cfg, &out, dir.path().join(k.to_string())).map_err(err)?;
        texts.push(std::fs::read_to_string(csv).map_err(err)?);
    }
    let (a, b) = (strip_wall(&texts[0]), strip_wall(&texts[1]));
    ensure(a == b, || "CSVs differ".into())?;
    Ok(format!("{} rows identical apart from wall_ms", a.len() - 1))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("gradient correctness", Duration::from_secs(10), c1_gradients),
        ("class membership", Duration::from_secs(60), c2_membership),
        ("difference bound and descent lemma", Duration::from_secs(60), c3_pair_bound_descent),
        ("beta-GD rate and sufficient decrease", Duration::from_secs(120), c4_beta_gd_rate),
        ("divergence certificate", Duration::from_secs(1), c5_certificate),
        ("SPIDER structure", Duration::from_secs(120), c6_spider),
        ("desk-scale orderings", Duration::from_secs(300), c7_orderings),
        ("SPIDER hyperparameter arithmetic", Duration::from_secs(60), c8_spider_arithmetic),
        ("Young and moment lemmas", Duration::from_secs(60), c9_young_moment),
        ("determinism", Duration::from_secs(300), c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = clock.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(d) if clock.elapsed() > *budget => Err(format!("{d} (runtime {secs:.1}s over {}s)", budget.as_secs())),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS [{secs:.2}s] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{secs:.2}s] {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
