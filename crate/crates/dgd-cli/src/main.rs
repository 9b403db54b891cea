use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dgd_cli::cmd::{self, RunConfig, SweepConfig};

#[derive(Parser)]
#[command(name = "dgd", version, about = "Delayed gradient descent: runs, bound checks, grid sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded dataset file
    GenData {
        /// ridge_ls, logistic or pl_ls
        #[arg(long)]
        problem: String,
        /// Number of rows
        #[arg(long)]
        m: usize,
        /// Number of columns
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = cmd::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the delayed scheme from x0 = 0 and check every bound that applies
    Run {
        /// ridge_ls, logistic or pl_ls (required unless --data names an existing file)
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Gradient delay, at least 1
        #[arg(long)]
        tau: u32,
        /// Step size: a number or an expression over L and tau, e.g. 0.6/(L*tau)
        #[arg(long)]
        eta: String,
        /// Contraction split parameter of the analysis
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Iteration count; defaults to 200*tau
        #[arg(long)]
        iters: Option<usize>,
        /// Gradient tolerance of the reference minimizer
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Dataset file: loaded when present, generated and saved otherwise
        #[arg(long)]
        data: Option<PathBuf>,
        /// Initial point as a comma list, overriding the zero default
        #[arg(long)]
        x0: Option<String>,
        /// Trace CSV destination
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the growth-factor grid and the randomized window recursion battery
    VerifyLemmas {
        /// Grid spacing over (0, 0.2]
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Random recursion instances to draw
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 909)]
        seed: u64,
        /// Force this growth factor at the smallest exponent and locate where it breaks
        #[arg(long)]
        probe_j: Option<f64>,
    },
    /// Run a (tau, eta) grid and summarize slopes and violation counts per cell
    Sweep {
        /// ridge_ls, logistic or pl_ls
        #[arg(long)]
        problem: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = cmd::DEFAULT_SEED)]
        seed: u64,
        /// Comma list of delays, e.g. 5,10,20,100
        #[arg(long)]
        taus: String,
        /// Comma list of step expressions over L and tau, e.g. 0.1/tau,0.2/tau
        #[arg(long)]
        etas: String,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Iterations per cell; defaults to 200*tau
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Fraction of each series used for the tail slope fit
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
        /// Summary CSV destination
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenData { problem, m, d, seed, out } => {
            cmd::cmd_gen_data(&problem, m, d, seed, &out).map(|()| true)
        }
        Command::Run { problem, m, d, seed, tau, eta, q, iters, tol, data, x0, out } => {
            cmd::cmd_run(&RunConfig {
                problem,
                m,
                d,
                seed,
                tau,
                eta_spec: eta,
                q,
                max_iters: iters,
                tol,
                data,
                x0,
                out,
            })
        }
        Command::VerifyLemmas { step, instances, seed, probe_j } => {
            cmd::cmd_verify_lemmas(step, instances, seed, probe_j)
        }
        Command::Sweep { problem, m, d, seed, taus, etas, q, iters, tol, tail, out } => {
            cmd::cmd_sweep(&SweepConfig {
                problem,
                m,
                d,
                seed,
                taus,
                etas,
                q,
                max_iters: iters,
                tol,
                tail,
                out,
            })
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
