//! `optineq`: construct, verify and cross-check the optimal sine and
//! sawtooth inequalities from the command line.
//!
//! Exit codes: 0 success, 1 a certificate or duality check failed, 2 bad
//! usage. Every command except CSV output prints a JSON envelope.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use optineq::Family;

/// Threads for parallel verification; unset or 0 lets rayon decide.
const THREADS_ENV: &str = "OPTINEQ_THREADS";

#[derive(Parser)]
#[command(
    name = "optineq",
    version,
    about = "Optimal sine and sawtooth inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal coefficients, their sum and the sharp bound.
    Coeffs {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Certify that the optimal combination never exceeds 1.
    Verify {
        #[command(flatten)]
        target: Target,
        /// Exact breakpoint check (sawtooth only, the default for it).
        #[arg(long)]
        exact: bool,
        /// Grid size for the sine certificate.
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Extremal measure and its dilated expectations.
    Measure {
        #[command(flatten)]
        target: Target,
    },
    /// The cotangent sum c_m.
    Cm {
        #[arg(short)]
        m: usize,
        /// Also report the logarithmic asymptotic and its residual.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Solve the discretised primal and dual LPs and compare them.
    LpCheck {
        #[command(flatten)]
        target: Target,
        /// Finest sine grid (a power of two, at least 1024; default scales with m).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// CSV of (x, f(x)) over one period.
    Plot {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Output file; standard output if omitted.
        #[arg(short)]
        o: Option<std::path::PathBuf>,
        /// Scale the sawtooth x axis from [0, 1) to [0, 2pi).
        #[arg(long)]
        two_pi: bool,
    },
}

#[derive(Args, Clone, Copy)]
struct Target {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(short)]
    m: usize,
}

#[derive(ValueEnum, Clone, Copy)]
enum FamilyArg {
    Sine,
    Sawtooth,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Sine => Family::Sine,
            FamilyArg::Sawtooth => Family::Sawtooth,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

/// How a command ended, mapped onto the process exit code.
#[derive(Debug)]
enum Outcome {
    Passed,
    Failed,
}

#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn configure_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        UsageError(format!(
            "{THREADS_ENV} must be a nonnegative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, UsageError> {
    configure_threads()?;
    match cli.command {
        Command::Coeffs { target, format } => {
            commands::coeffs(target.family.into(), target.m, format)
        }
        Command::Verify {
            target,
            exact,
            grid_size,
        } => commands::verify(target.family.into(), target.m, exact, grid_size),
        Command::Measure { target } => commands::measure(target.family.into(), target.m),
        Command::Cm { m, asymptotic } => commands::cm(m, asymptotic),
        Command::LpCheck { target, grid } => {
            commands::lp_check(target.family.into(), target.m, grid)
        }
        Command::Plot {
            target,
            samples,
            o,
            two_pi,
        } => commands::plot(
            target.family.into(),
            target.m,
            samples,
            o.as_deref(),
            two_pi,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
