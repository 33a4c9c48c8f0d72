use std::path::PathBuf;
use std::process::ExitCode;

use aciso_core::config::{ExperimentConfig, ExperimentKind};
use aciso_core::experiment;
use anyhow::Context;
use clap::{Parser, Subcommand};

/// Radial Allen–Cahn isoperimetric experiments.
#[derive(Parser, Debug)]
#[command(name = "aciso", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration; its `kind` is replaced by the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for results.csv, report.json and plot.gp.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Comma-separated interface widths, overriding the config.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Random samples per ε for stability and fuglede.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Profile constants τ₀, τ₁, κ₀ with cross-method residuals.
    Constants,
    /// Minimizers at each ε (or each (σ, m) pair).
    Minimize,
    /// ψ(ε) sweep with the derivative identity, or the Ψ(σ, m) surface.
    Sweep,
    /// Second-variation spectra and stability constants.
    Stability,
    /// Fuglede ratios over random admissible perturbations.
    Fuglede,
    /// Shooting solutions matched to minimizers through Λ(σ, m) = ℓ.
    Alexandrov,
    /// Every invariant suite and acceptance criterion.
    VerifyAll,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Constants => ExperimentKind::Constants,
            Command::Minimize => ExperimentKind::Minimize,
            Command::Sweep => ExperimentKind::Sweep,
            Command::Stability => ExperimentKind::Stability,
            Command::Fuglede => ExperimentKind::Fuglede,
            Command::Alexandrov => ExperimentKind::Alexandrov,
            Command::VerifyAll => ExperimentKind::VerifyAll,
        }
    }
}

fn config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::for_kind(kind),
    };
    cfg.kind = kind;
    if kind == ExperimentKind::Alexandrov && cfg.sigma.is_empty() {
        cfg.sigma = ExperimentConfig::for_kind(kind).sigma;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(e) = &cli.eps {
        cfg.eps = e.clone();
    }
    if let Some(d) = cli.dim {
        cfg.dim = d;
    }
    if let Some(k) = cli.samples {
        cfg.samples = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("thread pool")?;
    }
    let cfg = config(cli)?;
    let art = experiment::run(&cfg)?;
    art.write(&cfg.out).with_context(|| format!("writing artifacts to {}", cfg.out.display()))?;
    if let Some(checks) = art.report.get("checks").and_then(|c| c.as_array()).filter(|_| art.pass.is_some()) {
        for c in checks {
            let tag = if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            println!("[{tag}] {} {}: {}", c["id"].as_str().unwrap_or(""), c["name"].as_str().unwrap_or(""), c["detail"].as_str().unwrap_or(""));
        }
    }
    println!("{} rows written to {}", art.table.rows.len(), cfg.out.join("results.csv").display());
    Ok(art.pass.unwrap_or(true))
}
