//! Command-line surface: generators, counting, spectral analysis, the
//! bound curve, the spectrum optimizer and the verification suites.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure,
//! 3 verification failure.

mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use tourncycles::Error;

#[derive(Parser)]
#[command(name = "tourncycles", version, about = "3-cycle/4-cycle density machinery for tournaments")]
struct Cli {
    /// Worker thread cap (default: TOURNCYCLES_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tournament and write it in TRN format.
    Gen(GenArgs),
    /// Exact cycle counts and densities of a TRN file.
    Count(CountArgs),
    /// Skew-symmetric profile and normalized eigenvalues of a TRN file.
    Spectral(SpectralArgs),
    /// Evaluate the bound curve g and the envelopes at one density.
    Bound(BoundArgs),
    /// Emit the feasible-region table as CSV.
    Region(RegionArgs),
    /// Solve the spectrum optimization problem.
    Optimize(OptimizeArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// transitive | uniform | blowup | circular | potential | mixed | wrandom
    #[arg(long)]
    family: String,
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Seed for the sampled families (required there, unused otherwise).
    #[arg(long)]
    seed: Option<u64>,
    /// Part-size parameter z in (0, 1] (blowup) or [1/(k+1), 1/k] (mixed).
    #[arg(long)]
    z: Option<f64>,
    /// Circular-family parameter in [0, 1/2].
    #[arg(long)]
    xi: Option<f64>,
    /// Number of equal parts for the mixed family.
    #[arg(long)]
    k: Option<usize>,
    /// 1-based index of the variable-size part (mixed family).
    #[arg(long)]
    i: Option<usize>,
    /// 1-based index of the adjacent potential part (mixed family).
    #[arg(long)]
    i_prime: Option<usize>,
    /// File of potentials in [0, 1/2], one per line (potential family).
    #[arg(long)]
    z_file: Option<String>,
    /// File of potentials for the mixed family's two parts.
    #[arg(long)]
    p_file: Option<String>,
    /// Tournament-matrix file for wrandom: n rows of n reals.
    #[arg(long)]
    matrix: Option<String>,
    /// Output TRN path; without it the TRN goes to stdout and the JSON
    /// parameter echo to stderr.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct CountArgs {
    /// TRN file, or "-" for stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// json | pretty
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct SpectralArgs {
    /// TRN file, or "-" for stdin.
    #[arg(long, default_value = "-")]
    input: String,
}

#[derive(Args)]
struct BoundArgs {
    /// 3-cycle density in [0, 1/8].
    #[arg(long)]
    d: f64,
}

#[derive(Args)]
struct RegionArgs {
    /// Grid points over [0, 1/8] (at least 2).
    #[arg(long, default_value_t = 129)]
    grid: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// Sample a blow-up of this order at each grid point and append
    /// empirical t3/t4 columns.
    #[arg(long)]
    sample_n: Option<usize>,
    /// Seed for the empirical samples.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Third-moment target s3 in [0, 1/8].
    #[arg(long)]
    s3: Option<f64>,
    /// Normalized spectral radius in [0, 1/2].
    #[arg(long)]
    rho: Option<f64>,
    /// Minimize over rho in [rho_min(s3), 1/2] instead of fixing it.
    #[arg(long)]
    sweep: bool,
    /// CSV of "s3,rho" rows; one JSON solution is emitted per row.
    #[arg(long)]
    batch: Option<String>,
    /// Real-slot cap (defaults to a generous bound from rho).
    #[arg(long)]
    k: Option<usize>,
    /// Pair-slot cap.
    #[arg(long)]
    l: Option<usize>,
    /// Also run the numerical cross-check and report both values.
    #[arg(long)]
    numeric: bool,
    /// Restarts for the numerical cross-check.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Seed for the numerical cross-check.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// small-exhaustive | equality-family | spectral-identities |
    /// bridge-identities | identity-t4 | optimizer-crosscheck |
    /// region-consistency | all
    #[arg(long)]
    suite: String,
    /// Order for the exhaustive sweep (small-exhaustive only).
    #[arg(long)]
    max_n: Option<u32>,
    /// Seed for the sampled checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidTournament(_) | Error::Trn(_) | Error::Param(_) => 1,
        Error::Numerical(_) | Error::Infeasible { .. } => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.print().ok();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("TOURNCYCLES_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if t > 0 {
            tourncycles::configure_threads(t).ok();
        }
    }

    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Count(args) => commands::count(args),
        Command::Spectral(args) => commands::spectral(args),
        Command::Bound(args) => commands::bound(args),
        Command::Region(args) => commands::region(args),
        Command::Optimize(args) => commands::optimize(args),
        Command::Verify(args) => commands::verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
