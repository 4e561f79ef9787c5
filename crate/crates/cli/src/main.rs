//! `ampc` — simulation and analysis front end.
//!
//! Exit codes: 0 success, 1 configuration/IO error, 2 divergence in a
//! non-Monte-Carlo run.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::RootConfig;

#[derive(Parser)]
#[command(name = "ampc", version, about = "AMPC / AMPC-L1 booster re-entry simulation toolkit")]
struct Cli {
    /// Configuration file (JSON); bundled defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmark case (case1..case4) or the config's custom
    /// scenario under both controllers.
    Run {
        /// case1 | case2 | case3 | case4 | custom
        case: String,
    },
    /// Paired Monte Carlo campaign over the uncertain parameters.
    Montecarlo {
        /// Number of runs (overrides the config).
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Time-delay margins at the Mach-labeled operating points.
    Tdm {
        /// ampc | ampc-l1 | both
        #[arg(long, default_value = "both")]
        controller: String,
    },
    /// LTI gain/phase margins at the Mach-labeled operating points.
    Margins {
        /// Frequency sweep points (overrides the config).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Single-update timing comparison against conventional MPC.
    Bench {
        /// Repetitions per scheme (overrides the config).
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Parse and check the configuration and its plant model.
    ValidateConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RootConfig::load_or_default(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.analysis.montecarlo.seed = seed;
    }
    let result = match &cli.command {
        Command::Run { case } => commands::cmd_run(&cfg, case),
        Command::Montecarlo { runs } => {
            if let Some(n) = runs {
                cfg.analysis.montecarlo.n_runs = *n;
            }
            commands::cmd_montecarlo(&cfg)
        }
        Command::Tdm { controller } => commands::cmd_tdm(&cfg, controller),
        Command::Margins { points } => {
            if let Some(p) = points {
                cfg.analysis.margins.points = *p;
            }
            commands::cmd_margins(&cfg)
        }
        Command::Bench { runs } => {
            if let Some(n) = runs {
                cfg.analysis.bench_reps = *n;
            }
            commands::cmd_bench(&cfg)
        }
        Command::ValidateConfig => commands::cmd_validate(&cfg),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Diverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
