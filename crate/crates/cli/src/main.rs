use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use gsmooth::constants::{derive_det_constants, derive_stoch_constants};
use gsmooth::harness::{
    preset, run_checks, run_experiment, suite_targets, write_outputs, ExperimentConfig, PRESET_NAMES, SUITES,
};
use gsmooth::optimizers::{theoretical_gamma_det, theoretical_spider_hyperparams};
use gsmooth::{NoiseSpec, SmoothnessSpec};

#[derive(Parser)]
#[command(name = "gsmooth", version, about = "Normalized gradient methods under generalized smoothness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's, else `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated seeds overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Run a builtin preset.
    Repro {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
        /// Use the shrunken problem sizes.
        #[arg(long)]
        desk: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Print the resolved config instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Run a property suite and print its JSON report.
    Check {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print derived constants and theoretical step sizes.
    Constants {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        l0: f64,
        #[arg(long)]
        l1: f64,
        /// Also print the stochastic constants and SPIDER hyperparameters.
        #[arg(long)]
        stoch: bool,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        eps: Vec<f64>,
        /// Noise parameter Gamma for SPIDER.
        #[arg(long, default_value_t = 1.0)]
        noise_gamma: f64,
        /// Noise parameter Lambda for SPIDER.
        #[arg(long, default_value_t = 1.0)]
        noise_lambda: f64,
        /// Initial objective gap `f(w0) - inf f` for the SPIDER epoch count.
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
    },
}

/// A usage error (exit status 2) as opposed to a failed run or check.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn execute(cfg: &mut ExperimentConfig, out: PathBuf, seeds: Option<Vec<u64>>) -> Result<bool> {
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    cfg.validate()?;
    let result = run_experiment(cfg)?;
    let (csv, manifest) = write_outputs(cfg, &result, &out)?;
    let mut clean = true;
    for r in &result.runs {
        let status = serde_json::to_value(r.status)?;
        let status = status["status"].as_str().unwrap_or("unknown").to_owned();
        clean &= status != "diverged";
        println!(
            "{:<16} seed {:<3} {:<10} iterations {:<6} samples {:<9} f {:.6e} |grad| {:.3e}",
            r.algorithm, r.seed, status, r.iterations, r.samples, r.final_f, r.final_grad_norm
        );
    }
    println!("wrote {} and {}", csv.display(), manifest.display());
    if !clean {
        log::warn!("some runs diverged; their series are truncated");
    }
    Ok(true)
}

fn constants(
    spec: &SmoothnessSpec,
    stoch: bool,
    eps: &[f64],
    noise: &NoiseSpec,
    gap: f64,
) -> Result<()> {
    println!("alpha = {}, L0 = {}, L1 = {}", spec.alpha, spec.l0, spec.l1);
    if spec.is_interior() {
        let k = derive_det_constants(spec)?;
        println!("K0 = {:.6e}  K1 = {:.6e}  K2 = {:.6e}", k.k0, k.k1, k.k2);
    }
    println!();
    let betas: Vec<f64> = [spec.alpha, (spec.alpha + 1.0) / 2.0, 1.0]
        .into_iter()
        .fold(Vec::new(), |mut v, b| {
            if !v.contains(&b) {
                v.push(b);
            }
            v
        });
    println!("{:>10} {:>8} {:>14} {:>14}", "eps", "beta", "gamma", "T");
    for &e in eps {
        for &b in &betas {
            match theoretical_gamma_det(spec, e, b) {
                Ok(s) => println!("{e:>10} {b:>8.4} {:>14.6e} {:>14}", s.gamma, s.iterations),
                Err(err) => println!("{e:>10} {b:>8.4} {err}"),
            }
        }
    }
    if !stoch {
        return Ok(());
    }
    println!();
    if spec.is_interior() {
        let k = derive_stoch_constants(spec)?;
        println!("Kbar0 = {:.6e}  Kbar1 = {:.6e}  Kbar2 = {:.6e}", k.kbar0, k.kbar1, k.kbar2);
    }
    println!("Gamma = {}, Lambda = {}, gap = {gap}", noise.gamma, noise.lambda);
    println!("{:>10} {:>6} {:>12} {:>10} {:>14} {:>10} {:>16}", "eps", "q", "B", "B'", "gamma", "K", "samples");
    for &e in eps {
        match theoretical_spider_hyperparams(spec, noise, e, gap, None) {
            Ok(p) => println!(
                "{e:>10} {:>6} {:>12} {:>10} {:>14.6e} {:>10} {:>16}",
                p.config.q,
                p.config.big_batch,
                p.config.small_batch,
                p.config.gamma,
                p.epochs,
                p.config.sample_budget()
            ),
            Err(err) => println!("{e:>10} {err}"),
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, out, seeds } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            execute(&mut cfg, out, seeds)
        }
        Command::Repro {
            preset: name,
            desk,
            out,
            seeds,
            print_config,
        } => {
            let mut cfg = preset(&name, desk)?;
            if print_config {
                if let Some(s) = seeds {
                    cfg.seeds = s;
                }
                println!("{}", cfg.to_json()?);
                return Ok(true);
            }
            execute(&mut cfg, out, seeds)
        }
        Command::Check { suite, target, seed } => {
            let targets = suite_targets(&suite).unwrap_or(&[]);
            if let Some(t) = &target {
                if !targets.contains(&t.as_str()) {
                    bail!(Usage(format!(
                        "suite `{suite}` has no target `{t}` (expected one of {})",
                        targets.join(", ")
                    )));
                }
            }
            let rep = run_checks(&suite, target.as_deref(), seed)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            Ok(rep.passed)
        }
        Command::Constants {
            alpha,
            l0,
            l1,
            stoch,
            eps,
            noise_gamma,
            noise_lambda,
            gap,
        } => {
            let spec = SmoothnessSpec::new(alpha, l0, l1).map_err(|e| Usage(e.to_string()))?;
            let noise = NoiseSpec::new(noise_gamma, noise_lambda).map_err(|e| Usage(e.to_string()))?;
            constants(&spec, stoch, &eps, &noise, gap)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
