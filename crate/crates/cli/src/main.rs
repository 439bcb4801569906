use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use purent_cli::commands::{
    self, BoundConfig, ComplementarityConfig, EpsConfig, Quantity, SweepConfig,
};
use purent_cli::state_file::read_state;
use purent_cli::CliError;
use purent_core::bounds::BoundOptions;
use purent_core::sdp::SolverOptions;
use purent_core::DimList;

#[derive(Parser)]
#[command(
    name = "purent",
    version,
    about = "Purity distillation and geometric entanglement bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    tol_gap: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_feas: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Use Tr X = 2 in the two-way program.
    #[arg(long)]
    literal_trace_2: bool,
}

impl SolverArgs {
    fn options(&self) -> BoundOptions {
        BoundOptions {
            solver: SolverOptions {
                tol_gap: self.tol_gap,
                tol_feas: self.tol_feas,
                max_iter: self.max_iter,
            },
            literal_trace_2: self.literal_trace_2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Geometric-entanglement bounds across the Horodecki family (CSV).
    HorodeckiSweep {
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Bound a quantity for the state in a JSON file.
    Bound {
        state_file: PathBuf,
        #[arg(value_enum)]
        quantity: Quantity,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the two-system program for eg-lower.
        #[arg(long)]
        two_sys: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// PPT sandwich widths on Haar-random pure states (CSV).
    RandomEpsBenchmark {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "3,3,3")]
        dims: Vec<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check F→(ρ^AB) + E_g(ρ^BC) = 1 on Haar-random pure states (JSON).
    ComplementarityCheck {
        #[arg(long, default_value_t = 25)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn dims(v: Vec<usize>) -> Result<DimList, CliError> {
    DimList::new(v).map_err(CliError::from)
}

fn csv_out(out: Option<PathBuf>) -> Result<Box<dyn std::io::Write>, CliError> {
    Ok(match out {
        Some(p) => {
            let f =
                File::create(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::HorodeckiSweep {
            grid,
            restarts,
            seed,
            jobs,
            out,
            solver,
        } => {
            let cfg = SweepConfig {
                grid,
                restarts,
                seed,
                jobs,
                bound: solver.options(),
            };
            let rows = commands::horodecki_sweep(&cfg)?;
            commands::write_sweep_csv(&rows, csv_out(out)?)
        }
        Command::Bound {
            state_file,
            quantity,
            restarts,
            seed,
            two_sys,
            out,
            solver,
        } => {
            let state = read_state(&state_file)?;
            let cfg = BoundConfig {
                bound: solver.options(),
                restarts,
                seed,
                two_sys,
            };
            let report = commands::bound(&state, quantity, &cfg)?;
            commands::write_json(&report, out.as_deref())
        }
        Command::RandomEpsBenchmark {
            n,
            dims: d,
            seed,
            jobs,
            out,
            solver,
        } => {
            let cfg = EpsConfig {
                n,
                dims: dims(d)?,
                seed,
                jobs,
                bound: solver.options(),
            };
            let rows = commands::random_eps_benchmark(&cfg)?;
            commands::write_eps_csv(&rows, csv_out(out)?)
        }
        Command::ComplementarityCheck {
            n,
            dims: d,
            seed,
            jobs,
            out,
            solver,
        } => {
            let cfg = ComplementarityConfig {
                n,
                dims: dims(d)?,
                seed,
                jobs,
                bound: solver.options(),
            };
            let report = commands::complementarity_check(&cfg)?;
            commands::write_json(&report, out.as_deref())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
