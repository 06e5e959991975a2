use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{CsvOptions, PhaseRetrievalParams};
use crate::optimizers::SpiderConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Problem to build once per seed from the `data` stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    PhaseRetrieval {
        params: PhaseRetrievalParams,
    },
    /// Synthetic regression data with the chi-square DRO objective.
    DroSynthetic {
        n: usize,
        p: usize,
        noise_sd: f64,
        #[serde(default)]
        init: DroInit,
    },
    /// Regression data loaded from a CSV file.
    DroCsv {
        path: PathBuf,
        #[serde(default)]
        options: CsvOptions,
        #[serde(default)]
        init: DroInit,
    },
    /// `||w||^((2 - alpha) / (1 - alpha))` started from `w0 = init * 1`.
    PolynomialWitness { alpha: f64, dim: usize, init: f64 },
}

/// DRO starting point: model weights `~ Normal(0, weight_sd^2)`, `eta = eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DroInit {
    pub eta: f64,
    pub weight_sd: f64,
}

impl Default for DroInit {
    fn default() -> Self {
        Self {
            eta: 0.1,
            weight_sd: 1.0,
        }
    }
}

/// One algorithm and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Gd { gamma: f64 },
    BetaGd { gamma: f64, beta: f64 },
    ClippedGd { gamma: f64, clip: f64 },
    Sgd { gamma: f64, batch: usize },
    NormalizedSgd { gamma: f64, batch: usize },
    MomentumSgd { gamma: f64, batch: usize, mu: f64 },
    ClippedSgd { gamma: f64, batch: usize, clip: f64 },
    Spider { gamma: f64, q: usize, big_batch: usize, small_batch: usize },
}

impl AlgorithmSpec {
    /// Series name used in result rows.
    pub fn label(&self) -> String {
        match self {
            AlgorithmSpec::Gd { .. } => "gd".into(),
            AlgorithmSpec::BetaGd { beta, .. } => format!("beta_gd_{}", short(*beta)),
            AlgorithmSpec::ClippedGd { .. } => "clipped_gd".into(),
            AlgorithmSpec::Sgd { .. } => "sgd".into(),
            AlgorithmSpec::NormalizedSgd { .. } => "normalized_sgd".into(),
            AlgorithmSpec::MomentumSgd { .. } => "momentum_sgd".into(),
            AlgorithmSpec::ClippedSgd { .. } => "clipped_sgd".into(),
            AlgorithmSpec::Spider { .. } => "spider".into(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(
            self,
            AlgorithmSpec::Gd { .. } | AlgorithmSpec::BetaGd { .. } | AlgorithmSpec::ClippedGd { .. }
        )
    }

    /// Per-sample gradient evaluations per iteration, averaged over an epoch
    /// for SPIDER.
    pub fn samples_per_epoch(&self, sample_count: usize) -> (usize, u64) {
        match *self {
            AlgorithmSpec::Gd { .. } | AlgorithmSpec::BetaGd { .. } | AlgorithmSpec::ClippedGd { .. } => {
                (1, sample_count as u64)
            }
            AlgorithmSpec::Sgd { batch, .. }
            | AlgorithmSpec::NormalizedSgd { batch, .. }
            | AlgorithmSpec::MomentumSgd { batch, .. }
            | AlgorithmSpec::ClippedSgd { batch, .. } => (1, batch as u64),
            AlgorithmSpec::Spider {
                q,
                big_batch,
                small_batch,
                ..
            } => (q, (big_batch + (q - 1) * small_batch) as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.label())));
        let gamma = match *self {
            AlgorithmSpec::Gd { gamma }
            | AlgorithmSpec::BetaGd { gamma, .. }
            | AlgorithmSpec::ClippedGd { gamma, .. }
            | AlgorithmSpec::Sgd { gamma, .. }
            | AlgorithmSpec::NormalizedSgd { gamma, .. }
            | AlgorithmSpec::MomentumSgd { gamma, .. }
            | AlgorithmSpec::ClippedSgd { gamma, .. }
            | AlgorithmSpec::Spider { gamma, .. } => gamma,
        };
        if !(gamma > 0.0 && gamma.is_finite()) {
            return bad(format!("gamma must be > 0, got {gamma}"));
        }
        match *self {
            AlgorithmSpec::BetaGd { beta, .. } if !(0.0..=1.0).contains(&beta) => {
                bad(format!("beta must lie in [0, 1], got {beta}"))
            }
            AlgorithmSpec::ClippedGd { clip, .. } | AlgorithmSpec::ClippedSgd { clip, .. }
                if !(clip > 0.0 && clip.is_finite()) =>
            {
                bad(format!("clip must be > 0, got {clip}"))
            }
            AlgorithmSpec::Sgd { batch: 0, .. }
            | AlgorithmSpec::NormalizedSgd { batch: 0, .. }
            | AlgorithmSpec::MomentumSgd { batch: 0, .. }
            | AlgorithmSpec::ClippedSgd { batch: 0, .. } => bad("batch must be >= 1".into()),
            AlgorithmSpec::MomentumSgd { mu, .. } if !(mu > 0.0 && mu <= 1.0) => {
                bad(format!("mu must lie in (0, 1], got {mu}"))
            }
            AlgorithmSpec::Spider {
                gamma,
                q,
                big_batch,
                small_batch,
            } => SpiderConfig {
                iterations: q.max(1),
                q,
                big_batch,
                small_batch,
                gamma,
            }
            .validate()
            .or_else(|e| bad(e.to_string())),
            _ => Ok(()),
        }
    }
}

fn short(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_owned()
}

/// Warm start: a deterministic run whose final iterate seeds every
/// algorithm. Its samples are not counted in the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmStart {
    pub algorithm: AlgorithmSpec,
    pub iterations: usize,
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

fn default_log_every() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Experiment id; also the CSV file stem.
    pub id: String,
    pub problem: ProblemSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Iterations per algorithm, unless `sample_budget` is set.
    pub iterations: usize,
    /// Equal budget: each algorithm runs the most iterations (whole epochs
    /// for SPIDER) that fit in this many per-sample gradient evaluations.
    #[serde(default)]
    pub sample_budget: Option<u64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    #[serde(default)]
    pub warm_start: Option<WarmStart>,
    /// Minibatches drawn with replacement.
    #[serde(default = "default_true")]
    pub with_replacement: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::Config(format!("invalid experiment id `{}`", self.id)));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithm list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.iterations == 0 && self.sample_budget.is_none() {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if self.sample_budget == Some(0) {
            return Err(Error::Config("sample_budget must be >= 1".into()));
        }
        if self.log_every == 0 {
            return Err(Error::Config("log_every must be >= 1".into()));
        }
        let mut labels = BTreeSet::new();
        for a in &self.algorithms {
            a.validate()?;
            if !labels.insert(a.label()) {
                return Err(Error::Config(format!("duplicate algorithm `{}`", a.label())));
            }
            if let (AlgorithmSpec::Spider { q, .. }, None) = (a, self.sample_budget) {
                if !self.iterations.is_multiple_of(*q) {
                    return Err(Error::Config(format!(
                        "spider: iterations {} is not a multiple of q = {q}",
                        self.iterations
                    )));
                }
            }
        }
        if let Some(w) = &self.warm_start {
            w.algorithm.validate()?;
            if w.algorithm.is_stochastic() {
                return Err(Error::Config("warm start must be a deterministic method".into()));
            }
            if w.iterations == 0 {
                return Err(Error::Config("warm start needs >= 1 iteration".into()));
            }
        }
        match &self.problem {
            ProblemSpec::PhaseRetrieval { params } => {
                if params.d == 0 || params.m == 0 {
                    return Err(Error::Config("phase retrieval needs d, m >= 1".into()));
                }
            }
            ProblemSpec::DroSynthetic { n, p, noise_sd, .. } => {
                if *n == 0 || *p == 0 || !(*noise_sd >= 0.0) {
                    return Err(Error::Config("synthetic DRO needs n, p >= 1 and noise_sd >= 0".into()));
                }
            }
            ProblemSpec::DroCsv { .. } => {}
            ProblemSpec::PolynomialWitness { alpha, dim, init } => {
                if !(*alpha > 0.0 && *alpha < 1.0) || *dim == 0 || !init.is_finite() {
                    return Err(Error::Config("polynomial witness needs alpha in (0,1), dim >= 1".into()));
                }
            }
        }
        Ok(())
    }
}
