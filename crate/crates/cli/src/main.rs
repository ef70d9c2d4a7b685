//! `activeht` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "activeht", version, about = "Active sequential hypothesis testing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file and report every problem with its location.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Solve the information games and write the scalar summaries and
    /// mixtures.
    SolveGame {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate every bound at the prior for each penalty.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        penalties: Vec<f64>,
        #[arg(long, default_value = "uniform")]
        prior: String,
    },
    /// Monte Carlo estimate of E[tau], Pe and the total cost.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "pi2")]
        policy: String,
    },
    /// Grid value iteration for the optimal cost (M <= 4).
    DpSolve {
        #[command(flatten)]
        common: Common,
        #[arg(long = "L", required = true)]
        penalty: f64,
        /// Lattice denominator N; defaults depend on M.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Empirical (rate, reliability) points for a family of models.
    RateSweep {
        /// One model per family member; repeat or comma-separate.
        #[arg(long, value_delimiter = ',', required = true)]
        model: Vec<PathBuf>,
        #[arg(long = "L", required = true)]
        penalty: f64,
        #[arg(long, default_value = "pi2")]
        policy: String,
        #[arg(long = "rho-tilde", default_value_t = activeht::policies::DEFAULT_THRESHOLD_RHO)]
        rho_tilde: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = activeht::games::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a noisy-search model file.
    Nds {
        #[arg(long = "M")]
        locations: usize,
        /// Flip probability: one value for every size, or one per size 1..=M.
        #[arg(long, value_delimiter = ',', required = true)]
        noise: Vec<f64>,
        #[arg(long, default_value = "dyadic_intervals")]
        family: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: games, bounds, simulation and (M <= 4) the grid
    /// optimum, compared in one table.
    Sandwich {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "pi2")]
        policy: String,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "rho-tilde", default_value_t = activeht::policies::DEFAULT_THRESHOLD_RHO)]
    rho_tilde: f64,
    #[arg(long, default_value_t = activeht::games::DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long = "L", value_delimiter = ',', required = true)]
    penalties: Vec<f64>,
    #[arg(long, default_value = "uniform")]
    prior: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(commands::CliError::Report(r)) => {
            eprint!("{r}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                commands::CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
