//! Configuration-driven experiment runner.
//!
//! Exit codes: 0 success, 2 config/schema errors, 3 numerical guard trips.

mod config;
mod runner;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use runner::RunContext;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ruelle-lab",
    about = "Transfer-operator experiments for semigroups of expanding circle maps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Root seed for stochastic experiments (overrides params.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: rayon's choice). Results do not depend on
    /// the thread count; per-sample RNG streams are index-derived.
    #[arg(long)]
    threads: Option<usize>,
    /// Grid size override.
    #[arg(long)]
    grid_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Quenched conformal measure with its convergence-gap record.
    QuenchedMeasure(CommonArgs),
    /// Empirical contraction rates for the dual and primal actions.
    ContractionRate(CommonArgs),
    /// Eigenvalue cocycle residuals over random words.
    EigenCocycle(CommonArgs),
    /// Averaged-operator convergence and the ι-eigenproblem.
    AnnealedSpectrum(CommonArgs),
    /// Monte-Carlo annealed decay of correlations.
    AnnealedDecay(CommonArgs),
    /// Weighted-preimage equidistribution and pressure estimates.
    Equidistribution(CommonArgs),
    /// Martingale decomposition diagnostics and the empirical CLT.
    Asip(CommonArgs),
    /// Annealed (and optionally quenched) pressure over a δ-grid.
    NcifsPressure(CommonArgs),
    /// Bisection root of the annealed pressure.
    BowenRoot(CommonArgs),
    /// Cauchy probes and Hölder regression on the equilibrium boundary.
    BoundaryProbe(CommonArgs),
    /// Print the built-in fixture catalog.
    ListFixtures,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::QuenchedMeasure(_) => "quenched-measure",
            Command::ContractionRate(_) => "contraction-rate",
            Command::EigenCocycle(_) => "eigen-cocycle",
            Command::AnnealedSpectrum(_) => "annealed-spectrum",
            Command::AnnealedDecay(_) => "annealed-decay",
            Command::Equidistribution(_) => "equidistribution",
            Command::Asip(_) => "asip",
            Command::NcifsPressure(_) => "ncifs-pressure",
            Command::BowenRoot(_) => "bowen-root",
            Command::BoundaryProbe(_) => "boundary-probe",
            Command::ListFixtures => "list-fixtures",
        }
    }

    fn args(&self) -> Option<&CommonArgs> {
        match self {
            Command::QuenchedMeasure(a)
            | Command::ContractionRate(a)
            | Command::EigenCocycle(a)
            | Command::AnnealedSpectrum(a)
            | Command::AnnealedDecay(a)
            | Command::Equidistribution(a)
            | Command::Asip(a)
            | Command::NcifsPressure(a)
            | Command::BowenRoot(a)
            | Command::BoundaryProbe(a) => Some(a),
            Command::ListFixtures => None,
        }
    }
}

fn build_context(name: &str, args: &CommonArgs) -> Result<RunContext> {
    let config_bytes = std::fs::read(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let text = String::from_utf8(config_bytes.clone()).context("config is not UTF-8")?;
    let config = ExperimentConfig::parse(&text)?;
    if let Some(tag) = &config.experiment {
        if tag != name {
            anyhow::bail!("config tags experiment {tag:?} but subcommand is {name:?}");
        }
    }
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("initializing thread pool")?;
    }
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let seed = args.seed.or(config.params.seed);
    let grid_n = args
        .grid_n
        .or(config.params.grid_n)
        .unwrap_or(ruelle_lab::grid::DEFAULT_GRID);
    Ok(RunContext {
        experiment: name.to_string(),
        out_dir: args.out_dir.clone(),
        seed,
        grid_n,
        config,
        config_bytes,
    })
}

/// Schema/config problems exit 2; numerical guards exit 3.
fn classify(err: &anyhow::Error) -> u8 {
    use ruelle_lab::LabError::*;
    if let Some(lab) = err.downcast_ref::<ruelle_lab::LabError>() {
        return match lab {
            InvalidSystem(_) | InvalidEnvironment(_) => 2,
            BranchCapExceeded { .. }
            | NonpositiveDenominator { .. }
            | NotProbability { .. }
            | DegenerateFit(_)
            | EigenNoConvergence(_)
            | Degenerate(_)
            | Transport(_) => 3,
        };
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::ListFixtures) {
        print!("{}", runner::list_fixtures());
        return ExitCode::SUCCESS;
    }
    let name = cli.command.name();
    let args = cli.command.args().expect("non-list commands carry args");
    let result = build_context(name, args).and_then(|ctx| runner::run(&ctx));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = classify(&err);
            let diag = serde_json::json!({
                "error": format!("{err:#}"),
                "kind": if code == 3 { "numeric-guard" } else { "config" },
                "exit_code": code,
            });
            eprintln!("{diag}");
            ExitCode::from(code)
        }
    }
}
