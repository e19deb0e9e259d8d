//! `lightcone`: analysis of graph hypersurfaces in Lorentzian space from a JSON config.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "lightcone",
    version,
    about = "Light-like points and geodesics on zero mean curvature graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Light-likeness threshold on |B|; also the |B| tolerance of `verify`.
    #[arg(long)]
    tol_b: Option<f64>,
    /// Degeneracy threshold on the norm of grad B; also the grad B tolerance of `verify`.
    #[arg(long)]
    tol_grad: Option<f64>,
    /// Integration steps for `ode`, `geodesic` and `verify`.
    #[arg(long)]
    steps: Option<usize>,
    /// Seed for the Lipschitz sampling in `verify`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify grid points (classify.csv, classify.json).
    Classify(Common),
    /// Locate light-like points along grid lines (locus.csv).
    Locus(Common),
    /// Scan |A - phi B| over the grid (residual.json).
    Residual(Common),
    /// Tabulate the axis profile (reduce.csv).
    Reduce(Common),
    /// Integrate the reduced ODE (ode.csv).
    Ode(Common),
    /// Integrate an ambient geodesic (geodesic.csv).
    Geodesic(Common),
    /// Check the light-like geodesic theorem (verify.json).
    Verify(Common),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("LIGHTCONE_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            format!("LIGHTCONE_THREADS must be a positive integer, got \"{raw}\"")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot configure thread pool: {e}"))
}

fn run(cli: Cli) -> Result<commands::Outcome, String> {
    configure_threads()?;
    let (common, cmd): (&Common, commands::Handler) = match &cli.command {
        Command::Classify(c) => (c, commands::classify),
        Command::Locus(c) => (c, commands::locus),
        Command::Residual(c) => (c, commands::residual),
        Command::Reduce(c) => (c, commands::reduce),
        Command::Ode(c) => (c, commands::ode),
        Command::Geodesic(c) => (c, commands::geodesic),
        Command::Verify(c) => (c, commands::verify),
    };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("cannot read {}: {e}", common.config.display()))?;
    let overrides = config::Overrides {
        tol_b: common.tol_b,
        tol_grad: common.tol_grad,
        steps: common.steps,
        seed: common.seed,
    };
    let run = config::load(&text, overrides)?;
    cmd(&run, &common.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.code as u8)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
