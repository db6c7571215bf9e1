mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cayley_qmc::oracle::DEFAULT_SEED;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{CliError, Report};

#[derive(Parser, Debug)]
#[command(name = "cayley-qmc", version, about = "Phase structure of the XY quantum Markov chain on the Cayley tree of order 3")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Absolute tolerance for residual checks.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol_abs: f64,
    /// Relative tolerance for residual checks.
    #[arg(long, global = true, default_value_t = 1e-11)]
    pub tol_rel: f64,
    /// Seed for sampled observables and random starts.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BetaRange {
    #[arg(long, default_value_t = 0.05)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta_max: f64,
    /// Number of evenly spaced points, endpoints included.
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roots of P9 and the critical inverse temperatures.
    Critical,
    /// Regime, fixed-point count and spectral gap over a range of beta.
    Sweep(BetaRange),
    /// Orbit of the boundary recursion from (x0, y0).
    Trajectory {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long, default_value_t = 0.0)]
        y0: f64,
        #[arg(long, default_value_t = cayley_qmc::dynamics::DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Fixed points of the boundary recursion at one beta.
    FixedPoints {
        #[arg(long)]
        beta: f64,
    },
    /// Expectation of sigma1 at distance N under both boundary solutions.
    Correlation {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 30)]
        nmax: u32,
    },
    /// The thermodynamic function F and its slope over a range of beta.
    FreeEnergy {
        #[command(flatten)]
        range: BetaRange,
        /// Also report the finite-volume value on the ball of this radius.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Auxiliary inequalities on the default beta grid.
    Inequalities,
    /// Self-check suite; exit code 2 names the failing checks.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum FaultArg {
    FlipK1,
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Critical => commands::critical(c),
        Command::Sweep(range) => commands::sweep(c, range),
        Command::Trajectory { beta, x0, y0, max_steps } => commands::trajectory(c, *beta, *x0, *y0, *max_steps),
        Command::FixedPoints { beta } => commands::fixed_points(c, *beta),
        Command::Correlation { beta, nmax } => commands::correlation(c, *beta, *nmax),
        Command::FreeEnergy { range, n } => commands::free_energy(c, range, *n),
        Command::Inequalities => commands::inequalities(c),
        Command::Verify { level, inject_fault } => commands::verify(c, *level, *inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = dispatch(&cli).and_then(|report| {
        let mut sink = output::sink(cli.common.out.as_deref()).map_err(CliError::Io)?;
        report.write_to(&mut *sink).and_then(|_| sink.flush()).map_err(CliError::Io)?;
        Ok(report)
    });
    match result {
        Ok(report) => match report.failure() {
            None => ExitCode::SUCCESS,
            Some(reason) => {
                eprintln!("cayley-qmc: verification failed: {reason}");
                ExitCode::from(2)
            }
        },
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cayley-qmc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
