//! Builtin experiments. Full-scale presets use the published
//! hyperparameters; `desk` variants shrink the problems so they finish in
//! minutes.

use std::path::PathBuf;

use super::config::{
    AlgorithmSpec, DroInit, ExperimentConfig, ProblemSpec, WarmStart, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::objectives::{CsvOptions, PhaseRetrievalParams};

pub const PRESET_NAMES: [&str; 4] = ["phase-retrieval-det", "phase-retrieval-stoch", "dro-det", "dro-stoch"];

/// Default location of the life expectancy CSV for the full-scale DRO presets.
pub const DRO_CSV_PATH: &str = "data/life_expectancy.csv";

pub fn preset(name: &str, desk: bool) -> Result<ExperimentConfig> {
    let cfg = match (name, desk) {
        ("phase-retrieval-det", false) => phase_det(PhaseRetrievalParams::new(100, 3000), 8e-4),
        ("phase-retrieval-det", true) => phase_det(PhaseRetrievalParams::new(20, 500), 2e-3),
        ("phase-retrieval-stoch", false) => phase_stoch_full(),
        ("phase-retrieval-stoch", true) => phase_stoch_desk(),
        ("dro-det", false) => dro_det(dro_csv_problem()),
        ("dro-det", true) => dro_det(dro_desk_problem()),
        ("dro-stoch", false) => dro_stoch(dro_csv_problem(), 2000),
        ("dro-stoch", true) => dro_stoch(dro_desk_problem(), 200),
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let mut cfg = cfg;
    if desk {
        cfg.id.push_str("-desk");
    }
    cfg.validate()?;
    Ok(cfg)
}

fn base(id: &str, problem: ProblemSpec, algorithms: Vec<AlgorithmSpec>, iterations: usize) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        id: id.into(),
        problem,
        algorithms,
        iterations,
        sample_budget: None,
        seeds: vec![1, 2, 3, 4, 5],
        log_every: 1,
        warm_start: None,
        with_replacement: true,
        output_dir: None,
    }
}

fn phase_det(params: PhaseRetrievalParams, gd_gamma: f64) -> ExperimentConfig {
    base(
        "phase-retrieval-det",
        ProblemSpec::PhaseRetrieval { params },
        vec![
            AlgorithmSpec::Gd { gamma: gd_gamma },
            AlgorithmSpec::ClippedGd { gamma: 0.9, clip: 100.0 },
            AlgorithmSpec::BetaGd { gamma: 0.03, beta: 1.0 / 3.0 },
            AlgorithmSpec::BetaGd { gamma: 0.1, beta: 2.0 / 3.0 },
            AlgorithmSpec::BetaGd { gamma: 0.2, beta: 1.0 },
        ],
        500,
    )
}

fn phase_warm_start() -> WarmStart {
    WarmStart {
        algorithm: AlgorithmSpec::BetaGd { gamma: 0.1, beta: 2.0 / 3.0 },
        iterations: 100,
    }
}

fn phase_stoch_full() -> ExperimentConfig {
    let b = 50;
    let mut cfg = base(
        "phase-retrieval-stoch",
        ProblemSpec::PhaseRetrieval {
            params: PhaseRetrievalParams::new(100, 3000),
        },
        vec![
            AlgorithmSpec::Sgd { gamma: 2e-4, batch: b },
            AlgorithmSpec::NormalizedSgd { gamma: 2e-3, batch: b },
            AlgorithmSpec::MomentumSgd { gamma: 3e-3, batch: b, mu: 1e-4 },
            AlgorithmSpec::ClippedSgd { gamma: 0.3, batch: b, clip: 1e3 },
            AlgorithmSpec::Spider { gamma: 0.01, q: 5, big_batch: 3000, small_batch: 50 },
        ],
        500,
    );
    cfg.warm_start = Some(phase_warm_start());
    cfg
}

/// Equal sample budget, minibatches without replacement, step sizes tuned
/// on seed 0 over `{1, 2, 5} x 10^k`.
fn phase_stoch_desk() -> ExperimentConfig {
    let b = 50;
    let mut cfg = base(
        "phase-retrieval-stoch",
        ProblemSpec::PhaseRetrieval {
            params: PhaseRetrievalParams::new(20, 500),
        },
        vec![
            AlgorithmSpec::Sgd { gamma: 1e-4, batch: b },
            AlgorithmSpec::NormalizedSgd { gamma: 5e-4, batch: b },
            AlgorithmSpec::MomentumSgd { gamma: 2e-5, batch: b, mu: 1e-4 },
            AlgorithmSpec::ClippedSgd { gamma: 0.1, batch: b, clip: 1e3 },
            AlgorithmSpec::Spider { gamma: 2e-4, q: 5, big_batch: 500, small_batch: 50 },
        ],
        500,
    );
    cfg.sample_budget = Some(70_000);
    cfg.with_replacement = false;
    cfg.warm_start = Some(phase_warm_start());
    cfg
}

fn dro_csv_problem() -> ProblemSpec {
    ProblemSpec::DroCsv {
        path: PathBuf::from(DRO_CSV_PATH),
        options: CsvOptions {
            target: "Life expectancy".into(),
            drop_columns: vec!["Country".into(), "Status".into()],
            target_noise_sd: 1.0,
            max_rows: Some(2000),
            ..CsvOptions::default()
        },
        init: DroInit::default(),
    }
}

fn dro_desk_problem() -> ProblemSpec {
    ProblemSpec::DroSynthetic {
        n: 200,
        p: 5,
        noise_sd: 1.0,
        init: DroInit::default(),
    }
}

fn dro_det(problem: ProblemSpec) -> ExperimentConfig {
    base(
        "dro-det",
        problem,
        vec![
            AlgorithmSpec::Gd { gamma: 1e-4 },
            AlgorithmSpec::ClippedGd { gamma: 0.3, clip: 10.0 },
            AlgorithmSpec::BetaGd { gamma: 0.2, beta: 1.0 },
        ],
        50,
    )
}

fn dro_stoch(problem: ProblemSpec, big_batch: usize) -> ExperimentConfig {
    let b = 50;
    let mut cfg = base(
        "dro-stoch",
        problem,
        vec![
            AlgorithmSpec::Sgd { gamma: 2e-4, batch: b },
            AlgorithmSpec::NormalizedSgd { gamma: 8e-3, batch: b },
            AlgorithmSpec::MomentumSgd { gamma: 8e-3, batch: b, mu: 1e-4 },
            AlgorithmSpec::ClippedSgd { gamma: 0.05, batch: b, clip: 100.0 },
            AlgorithmSpec::Spider { gamma: 4e-3, q: 20, big_batch, small_batch: 50 },
        ],
        5000,
    );
    cfg.warm_start = Some(WarmStart {
        algorithm: AlgorithmSpec::BetaGd { gamma: 0.2, beta: 1.0 },
        iterations: 30,
    });
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_det_matches_published_values() {
        let cfg = preset("phase-retrieval-det", false).unwrap();
        assert_eq!(cfg.iterations, 500);
        assert_eq!(
            cfg.algorithms,
            vec![
                AlgorithmSpec::Gd { gamma: 8e-4 },
                AlgorithmSpec::ClippedGd { gamma: 0.9, clip: 100.0 },
                AlgorithmSpec::BetaGd { gamma: 0.03, beta: 1.0 / 3.0 },
                AlgorithmSpec::BetaGd { gamma: 0.1, beta: 2.0 / 3.0 },
                AlgorithmSpec::BetaGd { gamma: 0.2, beta: 1.0 },
            ]
        );
        match cfg.problem {
            ProblemSpec::PhaseRetrieval { params } => assert_eq!((params.d, params.m), (100, 3000)),
            _ => panic!("wrong problem"),
        }
    }

    #[test]
    fn dro_stoch_matches_published_values() {
        let cfg = preset("dro-stoch", false).unwrap();
        assert_eq!(cfg.iterations, 5000);
        assert_eq!(
            cfg.algorithms,
            vec![
                AlgorithmSpec::Sgd { gamma: 2e-4, batch: 50 },
                AlgorithmSpec::NormalizedSgd { gamma: 8e-3, batch: 50 },
                AlgorithmSpec::MomentumSgd { gamma: 8e-3, batch: 50, mu: 1e-4 },
                AlgorithmSpec::ClippedSgd { gamma: 0.05, batch: 50, clip: 100.0 },
                AlgorithmSpec::Spider { gamma: 4e-3, q: 20, big_batch: 2000, small_batch: 50 },
            ]
        );
        let w = cfg.warm_start.unwrap();
        assert_eq!(w.algorithm, AlgorithmSpec::BetaGd { gamma: 0.2, beta: 1.0 });
        assert_eq!(w.iterations, 30);
    }

    #[test]
    fn phase_stoch_and_dro_det_match_published_values() {
        let cfg = preset("phase-retrieval-stoch", false).unwrap();
        assert_eq!(
            cfg.algorithms[4],
            AlgorithmSpec::Spider { gamma: 0.01, q: 5, big_batch: 3000, small_batch: 50 }
        );
        assert_eq!(cfg.warm_start.unwrap().iterations, 100);
        let cfg = preset("dro-det", false).unwrap();
        assert_eq!(cfg.iterations, 50);
        assert_eq!(cfg.algorithms[1], AlgorithmSpec::ClippedGd { gamma: 0.3, clip: 10.0 });
    }

    #[test]
    fn desk_presets_shrink_problems() {
        for name in PRESET_NAMES {
            let cfg = preset(name, true).unwrap();
            assert!(cfg.id.ends_with("-desk"));
            match cfg.problem {
                ProblemSpec::PhaseRetrieval { params } => assert_eq!((params.d, params.m), (20, 500)),
                ProblemSpec::DroSynthetic { n, p, .. } => assert_eq!((n, p), (200, 5)),
                _ => panic!("desk presets are self-contained"),
            }
        }
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(matches!(preset("nope", true), Err(Error::Config(_))));
    }
}
