use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use qnl_cli::budget::BudgetError;
use qnl_cli::config::{Format, SweepConfig};
use qnl_cli::output::{budget_to_csv, budget_to_json, figure_to_csv, figure_to_json};
use qnl_cli::verify::VerifyOptions;
use qnl_cli::{run_budget, spin_figure, verify};

/// Quantum-noise budgets for linear force sensors.
#[derive(Parser)]
#[command(name = "qnl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of the config's path or stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Seed for the verification sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized noise budget over the configured sweep.
    Budget { config: PathBuf },
    /// Run the invariant checks for a config.
    Verify {
        config: PathBuf,
        /// Budget file to compare against row by row.
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        oracle_points: usize,
    },
    /// Full, σ = 0 and matched spin-meter series over the `sweep` section.
    SpinFigure { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> anyhow::Result<SweepConfig> {
    SweepConfig::load(path).with_context(|| format!("config {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let format_of = |cfg: &SweepConfig| match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => cfg.output.format,
    };
    let out_of = |cfg: &SweepConfig| cli.output.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));

    match &cli.command {
        Command::Budget { config } => {
            let cfg = load(config)?;
            let table = run_budget(&cfg, cli.jobs)?;
            let text = match format_of(&cfg) {
                Format::Csv => budget_to_csv(&table),
                Format::Json => budget_to_json(&table),
            };
            emit(&text, out_of(&cfg).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, golden, oracle_points } => {
            let cfg = load(config)?;
            let opts = VerifyOptions { seed: cli.seed, oracle_points: *oracle_points, ..VerifyOptions::default() };
            let report = verify(&cfg, &opts, golden.as_deref(), cli.jobs)?;
            emit(&report.render(), cli.output.as_deref())?;
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::SpinFigure { config } => {
            let cfg = load(config)?;
            let fig = spin_figure(&cfg)?;
            let text = match format_of(&cfg) {
                Format::Csv => figure_to_csv(&fig),
                Format::Json => figure_to_json(&fig),
            };
            emit(&text, out_of(&cfg).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QNL_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let kind = match e.downcast_ref::<BudgetError>() {
                Some(BudgetError::Point(_)) => "error",
                _ => "config error",
            };
            eprintln!("qnl: {kind}: {e:#}");
            ExitCode::from(1)
        }
    }
}
