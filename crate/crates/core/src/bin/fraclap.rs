use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fraclap::config::{RunConfig, Scenario};
use fraclap::run::{exit_code, run};

#[derive(Parser)]
#[command(name = "fraclap", version, about = "Fractional competition systems: solve, sweep, diagnose")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once at the configured beta.
    Solve(Common),
    /// Continuation in beta with warm starts, then diagnostics of the last field.
    #[command(name = "sweep_beta", alias = "sweep-beta")]
    SweepBeta(Common),
    /// Diagnostics of a stored field.
    Diagnose(Common),
    /// Partition exponents on a grid of s values.
    Exponents(Common),
    /// Decay estimate under boundary absorption on a parameter grid.
    #[command(name = "barrier_check", alias = "barrier-check")]
    BarrierCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for automatic.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Reserved; every algorithm is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, common) = match cli.command {
        Command::Solve(c) => (Scenario::Solve, c),
        Command::SweepBeta(c) => (Scenario::SweepBeta, c),
        Command::Diagnose(c) => (Scenario::Diagnose, c),
        Command::Exponents(c) => (Scenario::Exponents, c),
        Command::BarrierCheck(c) => (Scenario::BarrierCheck, c),
    };
    let _ = common.seed;
    if let Err(e) = fraclap::par::configure_threads(common.threads) {
        eprintln!("error: cannot configure {} threads: {e}", common.threads);
        return ExitCode::from(2);
    }
    let cfg = match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let result = cfg.and_then(|cfg| {
        let out = common.out.clone().unwrap_or_else(|| cfg.base_dir.join(&cfg.output.dir));
        run(&cfg, scenario, &out).map(|summary| (summary, out))
    });
    match result {
        Ok((summary, out)) => {
            for a in &summary.artifacts {
                println!("{}  {}", a.sha256, out.join(&a.name).display());
            }
            println!("{} finished in {:.2} s", summary.scenario.name(), summary.wall_time);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
