use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use symloss::config::{ExperimentConfig, ExperimentKind};
use symloss::pipeline::ThresholdChoice;
use symloss::{bundled, experiments, LossKind};

/// Experiments on learning from corrupted labels with symmetric losses.
///
/// Without `--config` each subcommand runs its bundled default config.
#[derive(Debug, Parser)]
#[command(name = "symloss", version)]
struct Cli {
    /// Experiment config (TOML), or the manifest.json of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run with this single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run with this single loss instead of the configured list.
    #[arg(long, global = true)]
    loss: Option<LossKind>,
    /// Threshold rule of the keyword pipeline.
    #[arg(long, global = true, value_enum)]
    threshold_method: Option<ThresholdArg>,
    /// Known positive share of the unlabeled documents.
    #[arg(long, global = true)]
    prior: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check the corrupted-risk decompositions and minimizer identities on random finite problems.
    VerifyIdentities,
    /// Train on corrupted Gaussians over a grid of contamination levels.
    NoiseSweep,
    /// Compare losses at fixed contamination against clean-trained baselines.
    LossCompare,
    /// Positive-unlabeled learning through the contamination model.
    PuDemo,
    /// Learning from two unlabeled sets through the contamination model.
    UuDemo,
    /// Pseudo-label documents with keywords, train a ranker and threshold it.
    Keywords,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::VerifyIdentities => ExperimentKind::VerifyIdentities,
            Command::NoiseSweep => ExperimentKind::NoiseSweep,
            Command::LossCompare => ExperimentKind::LossCompare,
            Command::PuDemo => ExperimentKind::PuDemo,
            Command::UuDemo => ExperimentKind::UuDemo,
            Command::Keywords => ExperimentKind::Keywords,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ThresholdArg {
    Breakeven,
    Heuristic,
    Default,
}

impl From<ThresholdArg> for ThresholdChoice {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Breakeven => ThresholdChoice::Breakeven,
            ThresholdArg::Heuristic => ThresholdChoice::Heuristic,
            ThresholdArg::Default => ThresholdChoice::Default,
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
        None => bundled::default_config(kind).map_err(|e| e.to_string())?,
    };
    if cfg.experiment != kind {
        return Err(format!(
            "config describes experiment `{}` but the subcommand runs `{}`",
            cfg.experiment.name(),
            kind.name()
        ));
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(loss) = cli.loss {
        cfg.losses = vec![loss];
        cfg.train.loss = loss;
    }
    if let Some(t) = cli.threshold_method {
        cfg.keywords.threshold_method = t.into();
    }
    if let Some(p) = cli.prior {
        cfg.keywords.prior = Some(p);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let output = match experiments::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let manifest = match output.write(&cfg.output_dir, &cfg) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for c in &output.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", manifest.display());
    if output.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
