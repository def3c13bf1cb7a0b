//! `dfsusc`: batch front-end for susceptibility computations.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "dfsusc", version, about = "Dynamical fidelity susceptibility of decoherence-free subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output format (default: json for verify, csv otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Built-in example: dephasing-pair or singlet-triplet.
    #[arg(long, conflicts_with = "model")]
    pub example: Option<String>,

    /// Model description JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Qubit count for a built-in example.
    #[arg(long, conflicts_with = "model")]
    pub n: Option<usize>,

    /// Fock cutoff of every bath mode of a built-in example.
    #[arg(long, conflicts_with = "model")]
    pub cutoff: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic susceptibility from correlation matrices.
    Chi(ModelArgs),
    /// Brute-force susceptibility from a fidelity fit.
    FitChi {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated perturbation strengths.
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        /// Relative tolerance of the fit against the analytic value.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        /// Skip the recomputation at cutoff + 2.
        #[arg(long)]
        no_cutoff_check: bool,
    },
    /// Analytic susceptibility over a list of sizes, with a power-law fit.
    Sweep {
        #[arg(long)]
        example: String,
        /// Comma-separated qubit counts.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Randomized invariant suites.
    Verify {
        #[arg(long, default_value_t = dfsusc::random::DEFAULT_SEED)]
        seed: u64,
        /// Suites to run (comma-separated); all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// First-order fidelity slope of Lindblad dynamics.
    LindbladF1 {
        /// Lindblad model JSON file; seeded random models when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = dfsusc::random::DEFAULT_SEED)]
        seed: u64,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        /// Largest accepted |F1|.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Block-resolved decomposition of the susceptibility.
    CrossTerms(ModelArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool is configured once");
    }
    let result = match cli.command {
        Command::Chi(m) => commands::chi(&m, cli.format.unwrap_or(Format::Csv)),
        Command::FitChi { model, eps_grid, t_grid, tol, no_cutoff_check } => commands::fit_chi(
            &model,
            eps_grid,
            t_grid,
            tol,
            !no_cutoff_check,
            cli.format.unwrap_or(Format::Csv),
        ),
        Command::Sweep { example, n_list, cutoff } => {
            commands::sweep(&example, n_list, cutoff, cli.format.unwrap_or(Format::Csv))
        }
        Command::Verify { seed, only } => commands::verify(seed, only, cli.format.unwrap_or(Format::Json)),
        Command::LindbladF1 { model, seed, t_grid, tol } => {
            commands::lindblad_f1(model.as_deref(), seed, t_grid, tol, cli.format.unwrap_or(Format::Csv))
        }
        Command::CrossTerms(m) => commands::cross_terms(&m, cli.format.unwrap_or(Format::Csv)),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = output::emit(&outcome.text, cli.out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if let Some(note) = outcome.note {
                eprintln!("{note}");
            }
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
