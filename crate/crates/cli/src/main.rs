//! Experiment runner. Exit codes: 2 config, 3 space construction, 4 a
//! checked property failed (artifacts are still written).

mod config;
mod error;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Space};
use error::{CliError, CliResult};
use experiments::Artifacts;

#[derive(Parser)]
#[command(name = "cat0-morse", version, about = "Geometry experiments in Coxeter flats and tree products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Oracle grid size; overrides the config.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Morse,
    Zigzag,
    Dive,
    Leave,
    Contraction,
    FinslerOracle,
    Hyperbolicity,
    Endpoint,
}

fn run(cli: &Cli) -> CliResult<Artifacts> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(g) = cli.grid {
        if g < 2 {
            return Err(CliError::Config("--grid must be at least 2".into()));
        }
        cfg.grid = g;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    let space: Space = cfg.build_space()?;
    let artifacts = match cli.command {
        Command::Morse => experiments::morse(&cfg, &space),
        Command::Zigzag => experiments::zigzag(&cfg, &space),
        Command::Dive => experiments::dive(&cfg, &space),
        Command::Leave => experiments::leave(&cfg, &space),
        Command::Contraction => experiments::contraction(&cfg, &space),
        Command::FinslerOracle => experiments::finsler_oracle_table(&cfg, &space),
        Command::Hyperbolicity => experiments::hyperbolicity(&cfg, &space),
        Command::Endpoint => experiments::endpoint(&cfg, &space),
    }?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    write(&out, &artifacts)?;
    Ok(artifacts)
}

fn write(dir: &Path, a: &Artifacts) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    let command = a.report["command"].as_str().unwrap_or("report");
    let mut json = serde_json::to_string_pretty(&a.report)?;
    json.push('\n');
    std::fs::write(dir.join(format!("{command}.json")), json)?;
    for (name, text) in &a.tables {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|a| {
        println!("{} checks, {} failed", a.checks, a.failed);
        if a.failed > 0 {
            Err(CliError::Property { failed: a.failed, total: a.checks })
        } else {
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
