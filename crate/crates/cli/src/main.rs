//! `nlfronts`: batch front-end for the nonlocal front solver.
//!
//! Exit codes: 0 success, 1 solver error or failed check under `--strict`,
//! 2 invalid configuration.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Outcome, RunContext};

#[derive(Parser)]
#[command(name = "nlfronts", version, about = "Traveling fronts of u_t = mu * u - u + f(u)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides outputs.directory; default "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent solves.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Exit with 1 when a check fails instead of only reporting it.
    #[arg(long, global = true)]
    strict: bool,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evolve an initial profile and write snapshots.
    Simulate,
    /// Full front pipeline with a direct-simulation cross-check.
    Front,
    /// Exponential-moment speed bounds and their gap.
    Bounds,
    /// Numerical certification of the semiflow hypotheses.
    Hypotheses,
    /// Series exponential of the measure against its moment generating function.
    MgfCheck,
    /// Sub/super-solution construction and its speed check.
    SubsuperCheck,
}

fn run(cli: &Cli) -> Result<Outcome, (u8, anyhow::Error)> {
    let invalid = |e: anyhow::Error| (2, e);
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| invalid(anyhow::anyhow!("--config is required")))?;
    let cfg = config::load(path).map_err(invalid)?;
    let problem = config::validate(cfg).map_err(invalid)?;
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| (1, e.into()))?;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| problem.cfg.outputs.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| (1, e.into()))?;
    let ctx = RunContext {
        problem: &problem,
        out,
        svg: cli.svg || problem.cfg.outputs.svg,
    };
    let result = match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Front => commands::front(&ctx),
        Command::Bounds => commands::bounds(&ctx),
        Command::Hypotheses => commands::hypotheses(&ctx),
        Command::MgfCheck => commands::mgf_check(&ctx),
        Command::SubsuperCheck => commands::subsuper_check(&ctx),
    };
    result.map_err(|e| (1, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            if o.passed || !cli.strict {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed (--strict)");
                ExitCode::from(1)
            }
        }
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
