//! `antisym` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
//! configuration and I/O errors.

mod commands;
mod config;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use antisym::calculus::JacobianMethod;
use antisym::represent::TargetKind;
use antisym::verify::Mutation;
use antisym::ProjectionMode;
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Outcome;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "antisym", version, about = "Anti-symmetric basis maps: construction, checks and odd-model fits")]
struct Cli {
    /// JSON run configuration; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON result instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    #[arg(short, long, global = true)]
    n: Option<usize>,
    #[arg(short, long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    mode: Option<ProjectionMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the feature map, print its dimensions and write it as JSON.
    Basis {
        /// Evaluate eta on configurations read from this CSV file.
        #[arg(long)]
        eval: Option<PathBuf>,
    },
    /// Run the property certifiers.
    Verify {
        #[arg(long)]
        trials: Option<usize>,
        /// Corrupt the map first; the certifiers should then fail.
        #[arg(long)]
        mutate: Option<Mutation>,
    },
    /// Jacobian, singular values and rank at given configurations.
    Jacobian {
        /// Comma-separated coordinates, particle by particle. Repeatable.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
        /// `exact` or `fd`.
        #[arg(long)]
        method: Option<JacobianMethod>,
    },
    /// Fit an odd model g with f ≈ g ∘ eta.
    Fit {
        #[arg(long)]
        target: Option<TargetKind>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        features: Option<usize>,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        holdout: Option<usize>,
    },
    /// Evaluate a saved model on configurations from a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Regularity counterexample curves or a rank report.
    Demo {
        which: Demo,
        /// Comma-separated list of ε values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Lipschitz,
    C1,
    Jacobian,
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = cli.n {
        cfg.n = v;
    }
    if let Some(v) = cli.d {
        cfg.d = v;
    }
    if let Some(v) = cli.mode {
        cfg.projection_mode = v;
    }
    match &cli.command {
        Command::Verify { trials: Some(t), .. } => cfg.verify.trials = *t,
        Command::Jacobian { method: Some(m), .. } => cfg.jacobian.method = *m,
        Command::Fit {
            target,
            samples,
            features,
            ridge,
            holdout,
        } => {
            if let Some(v) = target {
                cfg.fit.target = *v;
            }
            if let Some(v) = samples {
                cfg.fit.samples = *v;
            }
            if let Some(v) = features {
                cfg.fit.feature_count = *v;
            }
            if let Some(v) = ridge {
                cfg.fit.ridge = *v;
            }
            if let Some(v) = holdout {
                cfg.fit.holdout = *v;
            }
        }
        Command::Demo { eps: Some(e), .. } => cfg.demo.eps_list = e.clone(),
        _ => {}
    }
    if let Command::Jacobian { points, .. } | Command::Demo { points, .. } = &cli.command {
        if !points.is_empty() {
            cfg.jacobian.points = points
                .iter()
                .map(|p| input::parse_point(p))
                .collect::<Result<_>>()?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve(cli)?;
    let outcome = match &cli.command {
        Command::Basis { eval } => commands::basis(&cfg, eval.as_deref())?,
        Command::Verify { mutate, .. } => commands::verify(&cfg, *mutate)?,
        Command::Jacobian { .. } => commands::jacobian(&cfg, false)?,
        Command::Fit { .. } => commands::fit(&cfg)?,
        Command::Predict { model, input } => commands::predict(&cfg, model, input)?,
        Command::Demo { which, .. } => match which {
            Demo::Lipschitz | Demo::C1 => commands::curve(&cfg, *which)?,
            Demo::Jacobian => commands::jacobian(&cfg, true)?,
        },
    };
    outcome
        .write_files(&cfg.output_dir)
        .with_context(|| format!("writing to {}", cfg.output_dir.display()))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!("{}", outcome.json);
            } else {
                print!("{}", outcome.text);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
