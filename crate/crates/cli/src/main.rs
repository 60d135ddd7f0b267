//! Command-line surface. Validation and formatting live here; every numeric
//! cell comes from one library call.

mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand};

use commands::CmdError;

/// Cooperative stop flag. The signal handler only flips this atomic; the
/// block engines poll it at chunk boundaries, and the checkpoint on disk is
/// already current, so an interrupt costs at most one chunk of redone work.
static STOP: AtomicBool = AtomicBool::new(false);

extern "C" fn sigint_handler(_sig: libc::c_int) {
    STOP.store(true, Ordering::Relaxed);
}

fn install_sigint_handler() {
    unsafe {
        libc::signal(
            libc::SIGINT,
            sigint_handler as *const () as libc::sighandler_t,
        );
    }
}

#[derive(Parser)]
#[command(
    name = "primecorr",
    version,
    about = "Prime correlation toolkit: Ramanujan sums, kernel series, spectra, and quadratic twin prime statistics",
    after_help = "Exit codes: 0 success/match, 1 computation mismatch or failure, 2 usage error, 130 interrupted.\n\
                  PRIMECORR_THREADS sets the default worker count; --threads and a config-file entry override it."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: config::RawOpts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Pair density constants and the quadratic singular series, with tails
    Constants,
    /// Quadratic twin count table, self-verified against the embedded reference rows
    Table1,
    /// Spectral density on a sigma grid: truncated sum vs product form
    Spectrum,
    /// Kernel series f(n, s): Taylor coefficients, truncated sum, Euler product
    Series,
    /// Lambda-weighted correlation sums (linear shift m, or quadratic n^2+1 / n^2+3)
    Correlate,
    /// Kernel-sum prediction vs direct Lambda sum vs density-integral prediction
    Compare,
    /// Run the acceptance suite; one PASS/FAIL line per criterion
    Verify,
    /// Resume an interrupted job from its checkpoint file
    Resume,
}

impl Cmd {
    /// Flags each command consumes beyond the universal threads/format/config.
    fn accepted_flags(self) -> &'static [&'static str] {
        match self {
            Cmd::Constants => &["p_cutoff"],
            Cmd::Table1 => &["x", "segment_size"],
            Cmd::Spectrum => &["m", "sigma", "q_trunc", "p_cutoff", "x"],
            Cmd::Series => &["m", "sigma", "q_trunc", "p_cutoff"],
            Cmd::Correlate => &["x", "m", "n_limit", "segment_size", "checkpoint"],
            Cmd::Compare => &["m", "sigma", "x", "q_trunc"],
            Cmd::Verify => &[],
            Cmd::Resume => &["checkpoint"],
        }
    }
}

fn run(cli: Cli) -> Result<i32, CmdError> {
    let cfg = config::resolve(&cli.opts, cli.command.accepted_flags())?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CmdError::Failure(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Cmd::Constants => commands::cmd_constants(&cfg),
        Cmd::Table1 => commands::cmd_table1(&cfg, &STOP),
        Cmd::Spectrum => commands::cmd_spectrum(&cfg),
        Cmd::Series => commands::cmd_series(&cfg),
        Cmd::Correlate => commands::cmd_correlate(&cfg, &STOP),
        Cmd::Compare => commands::cmd_compare(&cfg),
        Cmd::Verify => commands::cmd_verify(&cfg),
        Cmd::Resume => commands::cmd_resume(&cfg, &STOP),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    install_sigint_handler();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
