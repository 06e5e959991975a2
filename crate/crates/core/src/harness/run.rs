use std::sync::Arc;
use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::sort_key;
use super::config::{AlgorithmSpec, DroInit, ExperimentConfig, ProblemSpec};
use crate::error::{Error, Result};
use crate::objectives::{
    generate_phase_retrieval, generate_synthetic_regression, load_regression_csv, make_polynomial_witness,
    DroInstance, DroObjective, Objective, PhaseRetrievalInstance, PhaseRetrievalObjective,
};
use crate::optimizers::{beta_gd, clipped_gd, sgd_family, spider, RunOptions, RunStatus, RunTrace, SgdVariant, SpiderConfig};
use crate::rng::{RngStream, DATA, INIT};
use crate::types::Vector;

/// Caps the worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "GSMOOTH_THREADS";

/// One logged iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub algorithm: String,
    pub seed: u64,
    pub t: usize,
    pub cumulative_samples: u64,
    pub f_value: f64,
    pub grad_norm: f64,
    pub wall_ms: f64,
}

impl ResultRow {
    /// Equality apart from the wall-clock column.
    pub fn same_values(&self, other: &Self) -> bool {
        Self {
            wall_ms: 0.0,
            ..self.clone()
        } == Self {
            wall_ms: 0.0,
            ..other.clone()
        }
    }
}

/// Outcome of one (algorithm, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub seed: u64,
    pub iterations: usize,
    #[serde(flatten)]
    pub status: RunStatus,
    /// Per-sample gradient evaluations charged to the run.
    pub samples: u64,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub runs: Vec<RunSummary>,
    pub wall_ms: f64,
}

impl ExperimentOutput {
    /// Final objective value of each seed for `algorithm`, in seed order.
    pub fn final_values(&self, algorithm: &str) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .map(|r| r.final_f)
            .collect()
    }
}

/// A generated problem shared by all runs of one seed.
#[derive(Clone)]
pub enum Problem {
    Phase(Arc<PhaseRetrievalInstance>),
    Dro(Arc<DroInstance>),
    Polynomial { alpha: f64, dim: usize },
}

impl Problem {
    /// A fresh objective with its own evaluation counter.
    pub fn objective(&self) -> Result<Box<dyn Objective>> {
        Ok(match self {
            Problem::Phase(inst) => Box::new(PhaseRetrievalObjective::new(inst.clone())),
            Problem::Dro(inst) => Box::new(DroObjective::new(inst.clone())),
            Problem::Polynomial { alpha, dim } => Box::new(make_polynomial_witness(*alpha, *dim)?),
        })
    }
}

fn dro_start(inst: &DroInstance, init: &DroInit, seed: u64) -> Vector {
    let mut rng = RngStream::new(seed, DATA).child(INIT);
    let mut w = rng.normal_vec(inst.p(), 0.0, init.weight_sd);
    w.push(init.eta);
    Array1::from(w)
}

/// Builds the problem and shared start point of `seed` from its `data` stream.
pub fn build_problem(spec: &ProblemSpec, seed: u64) -> Result<(Problem, Vector)> {
    let mut rng = RngStream::new(seed, DATA);
    match spec {
        ProblemSpec::PhaseRetrieval { params } => {
            let (inst, _, z0) = generate_phase_retrieval(params, &mut rng)?;
            Ok((Problem::Phase(Arc::new(inst)), z0))
        }
        ProblemSpec::DroSynthetic { n, p, noise_sd, init } => {
            let inst = generate_synthetic_regression(*n, *p, *noise_sd, &mut rng)?;
            let w0 = dro_start(&inst, init, seed);
            Ok((Problem::Dro(Arc::new(inst)), w0))
        }
        ProblemSpec::DroCsv { path, options, init } => {
            let inst = load_regression_csv(path, options, &mut rng)?;
            let w0 = dro_start(&inst, init, seed);
            Ok((Problem::Dro(Arc::new(inst)), w0))
        }
        ProblemSpec::PolynomialWitness { alpha, dim, init } => Ok((
            Problem::Polynomial {
                alpha: *alpha,
                dim: *dim,
            },
            Array1::from_elem(*dim, *init),
        )),
    }
}

/// Iteration count for `alg`: `iterations`, or the most that fit in the
/// sample budget (whole epochs for SPIDER).
pub fn iterations_for(cfg: &ExperimentConfig, alg: &AlgorithmSpec, sample_count: usize) -> Result<usize> {
    let Some(budget) = cfg.sample_budget else {
        return Ok(cfg.iterations);
    };
    let (per, cost) = alg.samples_per_epoch(sample_count);
    let epochs = budget / cost;
    if epochs == 0 {
        return Err(Error::Config(format!(
            "{}: sample budget {budget} is below one epoch ({cost} samples)",
            alg.label()
        )));
    }
    Ok(epochs as usize * per)
}

/// Runs `alg` from `w0` on `f`.
pub fn run_algorithm(
    f: &dyn Objective,
    w0: &Vector,
    alg: &AlgorithmSpec,
    iterations: usize,
    opts: &RunOptions,
) -> Result<RunTrace> {
    match *alg {
        AlgorithmSpec::Gd { gamma } => beta_gd(f, w0, gamma, 0.0, iterations, opts),
        AlgorithmSpec::BetaGd { gamma, beta } => beta_gd(f, w0, gamma, beta, iterations, opts),
        AlgorithmSpec::ClippedGd { gamma, clip } => clipped_gd(f, w0, gamma, clip, iterations, opts),
        AlgorithmSpec::Sgd { gamma, batch } => sgd_family(f, w0, gamma, iterations, batch, SgdVariant::Plain, opts),
        AlgorithmSpec::NormalizedSgd { gamma, batch } => {
            sgd_family(f, w0, gamma, iterations, batch, SgdVariant::Normalized, opts)
        }
        AlgorithmSpec::MomentumSgd { gamma, batch, mu } => {
            sgd_family(f, w0, gamma, iterations, batch, SgdVariant::Momentum { mu }, opts)
        }
        AlgorithmSpec::ClippedSgd { gamma, batch, clip } => {
            sgd_family(f, w0, gamma, iterations, batch, SgdVariant::Clipped { clip }, opts)
        }
        AlgorithmSpec::Spider {
            gamma,
            q,
            big_batch,
            small_batch,
        } => {
            let sc = SpiderConfig {
                iterations,
                q,
                big_batch,
                small_batch,
                gamma,
            };
            spider(f, w0, &sc, opts)
        }
    }
}

fn run_options(cfg: &ExperimentConfig, seed: u64) -> RunOptions {
    RunOptions {
        seed,
        log_every: cfg.log_every,
        with_replacement: cfg.with_replacement,
        ..RunOptions::default()
    }
}

struct SeedSetup {
    seed: u64,
    problem: Problem,
    start: Vector,
}

fn setup_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedSetup> {
    let (problem, mut start) = build_problem(&cfg.problem, seed)?;
    if let Some(warm) = &cfg.warm_start {
        let f = problem.objective()?;
        let trace = run_algorithm(f.as_ref(), &start, &warm.algorithm, warm.iterations, &run_options(cfg, seed))?;
        if let Some(t) = trace.diverged() {
            return Err(Error::Numerical(format!(
                "warm start {} diverged after iteration {t} (seed {seed})",
                warm.algorithm.label()
            )));
        }
        start = Array1::from(trace.final_point);
    }
    Ok(SeedSetup { seed, problem, start })
}

fn run_job(cfg: &ExperimentConfig, setup: &SeedSetup, alg: &AlgorithmSpec) -> Result<(Vec<ResultRow>, RunSummary)> {
    let f = setup.problem.objective()?;
    let iterations = iterations_for(cfg, alg, f.sample_count())?;
    let before = f.eval_count();
    let trace = run_algorithm(f.as_ref(), &setup.start, alg, iterations, &run_options(cfg, setup.seed))?;
    let delta = f.eval_count() - before;
    let last = trace.last();
    if trace.status == RunStatus::Completed && last.cumulative_samples != delta {
        return Err(Error::Numerical(format!(
            "{}: logged {} samples but the objective counted {delta}",
            alg.label(),
            last.cumulative_samples
        )));
    }
    let label = alg.label();
    let rows = trace
        .records
        .iter()
        .zip(&trace.wall_ms)
        .map(|(r, &ms)| ResultRow {
            experiment: cfg.id.clone(),
            algorithm: label.clone(),
            seed: setup.seed,
            t: r.t,
            cumulative_samples: r.cumulative_samples,
            f_value: r.f_value,
            grad_norm: r.grad_norm,
            wall_ms: ms,
        })
        .collect();
    let summary = RunSummary {
        algorithm: label,
        seed: setup.seed,
        iterations,
        status: trace.status,
        samples: delta,
        final_f: last.f_value,
        final_grad_norm: last.grad_norm,
        wall_ms: trace.wall_ms.last().copied().unwrap_or(0.0),
    };
    Ok((rows, summary))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => log::warn!("ignoring {THREADS_ENV}={v:?}: expected a positive integer"),
        }
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs every (seed, algorithm) pair. Rows are sorted by
/// `(algorithm, seed, t)` and runs by `(algorithm, seed)`, so the output
/// does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let clock = Instant::now();
    let pool = thread_pool()?;
    let (mut rows, mut runs) = pool.install(|| -> Result<_> {
        let setups = cfg
            .seeds
            .par_iter()
            .map(|&s| setup_seed(cfg, s))
            .collect::<Result<Vec<_>>>()?;
        let jobs: Vec<(&SeedSetup, &AlgorithmSpec)> = setups
            .iter()
            .flat_map(|s| cfg.algorithms.iter().map(move |a| (s, a)))
            .collect();
        let results = jobs
            .par_iter()
            .map(|(s, a)| run_job(cfg, s, a))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        let mut runs = Vec::new();
        for (r, s) in results {
            rows.extend(r);
            runs.push(s);
        }
        Ok((rows, runs))
    })?;
    rows.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    runs.sort_by(|a, b| (&a.algorithm, a.seed).cmp(&(&b.algorithm, b.seed)));
    for r in &runs {
        if let RunStatus::Diverged { last_finite_t } = r.status {
            log::warn!("{} seed {} diverged after t = {last_finite_t}", r.algorithm, r.seed);
        }
    }
    Ok(ExperimentOutput {
        rows,
        runs,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}
