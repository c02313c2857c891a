//! `qedft`: ground-state solvers for 1D electrons coupled to quantized
//! cavity modes.
//!
//! Subcommands: `exact` (sparse exact diagonalization with observables),
//! `scf` (Maxwell-Kohn-Sham self-consistent field), `displace-check`
//! (vector-potential/current equivalence), `hk-scan` (injectivity
//! falsification scan), `maxwell-residual` (mode-resolved static Maxwell
//! balance). Every run writes CSV observables plus a JSON manifest with the
//! resolved configuration and artifact hashes.
//!
//! Exit codes: 0 pass/converged, 2 non-convergence or violation, 1
//! usage/config error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use qedft_cli::commands::{run_command, Command};
use qedft_cli::config::RunConfig;

#[derive(Parser)]
#[command(name = "qedft", version, about = "Cavity ground-state laboratory")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides run.out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Repeatable `section.key=value` overrides applied after parsing.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Exact ground state with observables.
    Exact(CommonArgs),
    /// Maxwell-Kohn-Sham self-consistent field.
    Scf(CommonArgs),
    /// Verify the vector-potential/current equivalence.
    DisplaceCheck(CommonArgs),
    /// Injectivity falsification scan over sampled external pairs.
    HkScan(CommonArgs),
    /// Mode-resolved static Maxwell residuals of the exact ground state.
    MaxwellResidual(CommonArgs),
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut config = RunConfig::parse(&text)?;
    for item in &args.overrides {
        let (key_path, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--override expects section.key=value, got `{item}`"))?;
        let (section, key) = key_path
            .split_once('.')
            .ok_or_else(|| anyhow!("--override expects section.key=value, got `{item}`"))?;
        config
            .apply(section.trim(), key.trim(), value.trim())
            .with_context(|| format!("--override {item}"))?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = out.display().to_string();
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(command: Command, args: &CommonArgs) -> Result<i32> {
    let config = load_config(args)?;
    let out_dir = PathBuf::from(&config.out);
    let (manifest, code) = run_command(command, &config, &out_dir)?;
    eprintln!(
        "{}: status {} ({:.2}s), artifacts in {}",
        command.name(),
        manifest.status,
        manifest.wall_time_seconds,
        out_dir.display()
    );
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        CliCommand::Exact(a) => (Command::Exact, a),
        CliCommand::Scf(a) => (Command::Scf, a),
        CliCommand::DisplaceCheck(a) => (Command::DisplaceCheck, a),
        CliCommand::HkScan(a) => (Command::HkScan, a),
        CliCommand::MaxwellResidual(a) => (Command::MaxwellResidual, a),
    };
    match dispatch(command, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
