//! Command-line driver: `prep` samples and encodes a KDD Cup 99 file into a
//! bundle, `train` fits one model, `eval` scores it on the test split and
//! `compare` runs a list of models on the same split. See [`error::CliError`]
//! for exit codes and [`config`] for the configuration file.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;
pub mod mask;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use knotwork_core::eval::{comparison_table, confusion_table, svm_timing_table, Format};
use knotwork_core::Algorithm;

use crate::commands::TrainDetail;
use crate::config::{ModelKind, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "knotwork", version, about = "Intrusion detection experiments on KDD Cup 99 data")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    /// MLP training algorithm: gd, gdm, gda, rprop, scg or oss.
    #[arg(long, global = true, value_parser = parse_trainer)]
    pub trainer: Option<Algorithm>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample, split and encode the dataset into a bundle.
    Prep,
    /// Train the configured model on the bundle's training split.
    Train,
    /// Evaluate a trained model on the bundle's test split.
    Eval {
        /// Model file (default: the configured model under `<out>/models`).
        model_file: Option<PathBuf>,
    },
    /// Train and evaluate every model in `compare.models` on one split.
    Compare,
    /// Write a synthetic file in KDD Cup 99 format.
    Synth {
        /// Fraction of the 10% file's label counts to generate.
        #[arg(long, default_value_t = 0.01)]
        scale: f64,
        output: PathBuf,
    },
}

fn parse_trainer(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| format!("unknown trainer `{s}` (gd, gdm, gda, rprop, scg, oss)"))
}

impl Cli {
    /// Configuration file (or defaults) with flags applied, validated.
    pub fn resolve_config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(t) = self.trainer {
            cfg.mlp.train.algorithm = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Command::Synth { scale, output } = &cli.command {
        let seed = cli.seed.unwrap_or(RunConfig::default().seed);
        let n = commands::synth(output, *scale, seed)?;
        println!("wrote {n} records to {}", output.display());
        return Ok(());
    }
    let cfg = cli.resolve_config()?;
    match &cli.command {
        Command::Prep => {
            let m = commands::prep(&cfg)?;
            println!(
                "bundle in {}: train={} test={} content_sha256={}",
                cfg.out_dir.join("bundle").display(),
                m.train,
                m.test,
                m.content_sha256
            );
        }
        Command::Train => {
            let (path, summary) = commands::train(&cfg)?;
            match &summary.detail {
                TrainDetail::Mlp { training } => println!(
                    "{}: {} epochs, final mse {:.6}, goal {}",
                    summary.model,
                    training.epochs_run,
                    training.final_mse,
                    if training.converged { "met" } else { "not met" }
                ),
                TrainDetail::Ensemble { members } => {
                    for m in members {
                        println!("{} {}: size {}, {} positives", summary.model, m.class, m.size, m.positives);
                    }
                }
            }
            println!("model written to {}", path.display());
        }
        Command::Eval { model_file } => {
            let report = commands::eval(&cfg, model_file.as_deref())?;
            print!("{}", confusion_table(&report, Format::Text));
            if report.is_ensemble() {
                println!();
                print!("{}", svm_timing_table(&report, Format::Text));
            }
        }
        Command::Compare => match commands::compare(&cfg) {
            Ok(out) => print!("{}", comparison_table(&out.grid, Format::Text)),
            Err(e @ CliError::MissingCells { .. }) => {
                let path = commands::Layout::new(&cfg.out_dir).report("compare.txt");
                if let Ok(t) = std::fs::read_to_string(path) {
                    print!("{t}");
                }
                return Err(e);
            }
            Err(e) => return Err(e),
        },
        Command::Synth { .. } => unreachable!(),
    }
    Ok(())
}
