use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use cardsim::experiments::{
    self, curves_csv, run_sweep, run_tails, run_validate, tails_csv, with_threads, BoundsRow,
    CsvTable, ExperimentConfig, Overrides,
};
use clap::{Args, Parser, Subcommand};

/// Dispatching simulator and analytic bounds for parallel FCFS queues.
#[derive(Parser)]
#[command(name = "cardsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Produce every output listed under [outputs] (curves if none).
    Run(Common),
    /// Mean response time per policy and load.
    Sweep(Common),
    /// Response-time tail curves.
    Tails(Common),
    /// Analytic constants and bounds (no simulation).
    Bounds(Common),
    /// Check simulations against the analytic guarantees; exits 1 on failure.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    arrivals: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_path(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        cfg.apply(&Overrides { seed: self.seed, trials: self.trials, arrivals: self.arrivals })?;
        Ok(cfg)
    }
}

fn write(table: &CsvTable, dir: &Path, name: Option<&String>, default: &str) -> Result<()> {
    let path = dir.join(name.map(String::as_str).unwrap_or(default));
    table.write(&path)?;
    let rows = table.as_str().lines().count().saturating_sub(1);
    eprintln!("wrote {} ({rows} rows)", path.display());
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let rows = run_sweep(cfg)?;
    for r in rows.iter().filter(|r| !r.reason.is_empty()) {
        eprintln!("skipped {} at rho = {}: {}", r.policy, r.rho, r.reason);
    }
    write(&curves_csv(&rows), dir, cfg.outputs.curves_csv.as_ref(), "curves.csv")
}

fn tails(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let rows = run_tails(cfg)?;
    write(&tails_csv(&rows), dir, cfg.outputs.tails_csv.as_ref(), "tails.csv")
}

fn bounds(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let table = BoundsRow::to_csv(&experiments::bounds_table(cfg)?);
    print!("{}", table.as_str());
    write(&table, dir, cfg.outputs.bounds_csv.as_ref(), "bounds.csv")
}

fn validate(cfg: &ExperimentConfig, dir: &Path) -> Result<bool> {
    let report = run_validate(cfg)?;
    write(&report.to_csv(), dir, cfg.outputs.validate_report.as_ref(), "validate.csv")?;
    for r in report.failures() {
        eprintln!(
            "FAIL {} {} {} rho={}: measured {:?}, bound {:?}",
            r.check, r.policy, r.dist, r.rho, r.measured, r.bound
        );
    }
    let ok = report.all_passed();
    eprintln!("{} of {} checks passed", report.rows.iter().filter(|r| r.pass).count(), report.rows.len());
    Ok(ok)
}

fn execute(cli: Cli) -> Result<bool> {
    let common = match &cli.command {
        Command::Run(c) | Command::Sweep(c) | Command::Tails(c) | Command::Bounds(c) | Command::Validate(c) => c,
    };
    let cfg = common.load()?;
    let dir = common.out_dir.as_path();
    with_threads(common.threads, || -> Result<bool> {
        match &cli.command {
            Command::Sweep(_) => sweep(&cfg, dir).map(|_| true),
            Command::Tails(_) => tails(&cfg, dir).map(|_| true),
            Command::Bounds(_) => bounds(&cfg, dir).map(|_| true),
            Command::Validate(_) => validate(&cfg, dir),
            Command::Run(_) => {
                let o = &cfg.outputs;
                let none = o.curves_csv.is_none()
                    && o.tails_csv.is_none()
                    && o.bounds_csv.is_none()
                    && o.validate_report.is_none();
                if none || o.curves_csv.is_some() {
                    sweep(&cfg, dir)?;
                }
                if o.tails_csv.is_some() {
                    tails(&cfg, dir)?;
                }
                if o.bounds_csv.is_some() {
                    bounds(&cfg, dir)?;
                }
                match o.validate_report {
                    Some(_) => validate(&cfg, dir),
                    None => Ok(true),
                }
            }
        }
    })?
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
