use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nmpc_admm::bench::{
    self, emit_plot, summarize, EpsilonSweepConfig, HorizonSweepConfig, PlotKind, RhoGridConfig,
};
use nmpc_admm::problem::generate_random_instance;
use nmpc_admm::{solve, ProblemInstance, SolverParams, TraceLevel};

#[derive(Parser)]
#[command(name = "nmpc-admm", version, about = "ADMM for box-constrained MPC with a nonlinear input map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance as JSON.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance from a JSON file.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        rho1: f64,
        #[arg(long, default_value_t = 0.2)]
        rho2: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long = "max-iter", default_value_t = bench::DEFAULT_MAX_ITERS)]
        max_iter: usize,
        /// Per-iteration residuals and objective as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run an experiment over a random corpus and write one CSV row per solve.
    Exp {
        #[arg(value_enum)]
        kind: ExpKind,
        #[arg(long)]
        systems: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an experiment CSV as SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpKind {
    Rho,
    Eps,
    Horizon,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    Heatmap,
    Band,
}

fn run(cli: Cli) -> nmpc_admm::Result<()> {
    match cli.command {
        Command::Gen { seed, n, out } => {
            if n == 0 {
                return Err(nmpc_admm::Error::InvalidParams("horizon must be positive".into()));
            }
            generate_random_instance(seed, n).save(out)?;
        }
        Command::Solve { problem, rho1, rho2, eps, max_iter, trace } => {
            let inst = ProblemInstance::load(problem)?;
            let level = if trace.is_some() { TraceLevel::Residuals } else { TraceLevel::None };
            let params = SolverParams::new(rho1, rho2, eps).with_max_iters(max_iter).with_trace(level);
            let rep = solve(&inst, &params)?;
            if let Some(path) = trace {
                std::fs::write(path, rep.trace_csv())?;
            }
            println!("converged   {}", rep.converged);
            println!("iterations  {}", rep.iterations);
            println!("objective   {:.10e}", rep.objective);
            println!("r_norm      {:.3e}", rep.final_r_norm());
            println!("s_norm      {:.3e}", rep.final_s_norm());
            println!("wall_time_s {:.3e}", rep.wall_time);
        }
        Command::Exp { kind, systems, seed, out } => {
            let records = match kind {
                ExpKind::Rho => {
                    let mut cfg = RhoGridConfig { master_seed: seed, ..Default::default() };
                    cfg.systems = systems.unwrap_or(cfg.systems);
                    bench::rho_grid_experiment(&cfg)?
                }
                ExpKind::Eps => {
                    let mut cfg = EpsilonSweepConfig { master_seed: seed, ..Default::default() };
                    cfg.systems = systems.unwrap_or(cfg.systems);
                    bench::epsilon_sweep(&cfg)?
                }
                ExpKind::Horizon => {
                    let mut cfg = HorizonSweepConfig { master_seed: seed, ..Default::default() };
                    cfg.systems = systems.unwrap_or(cfg.systems);
                    bench::horizon_sweep(&cfg)?
                }
            };
            bench::save_records(&out, &records)?;
            println!("{:>5} {:>11} {:>11} {:>11} {:>8} {:>8} {:>8}", "n", "rho1", "rho2", "epsilon", "median", "mean", "p98");
            for row in summarize(&records) {
                println!(
                    "{:>5} {:>11.4e} {:>11.4e} {:>11.4e} {:>8.1} {:>8.1} {:>8.0}",
                    row.n, row.rho1, row.rho2, row.epsilon, row.iterations.median, row.iterations.mean, row.iterations.p98
                );
            }
        }
        Command::Plot { kind, input, out } => {
            let records = bench::load_records(input)?;
            let kind = match kind {
                PlotArg::Heatmap => PlotKind::Heatmap,
                PlotArg::Band => PlotKind::Band,
            };
            emit_plot(&records, kind, out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
