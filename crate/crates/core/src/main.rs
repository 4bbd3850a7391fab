use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tkam::run::{self, report, verify, Pipeline, RunConfig};
use tkam::Error;

/// Harmonic generation by coordinated-rotation-invariant bicircular beams.
#[derive(Debug, Parser)]
#[command(name = "tkam", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace a config value, e.g. `driver.l1=2`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline and write every output.
    Simulate { config: PathBuf },
    /// Run the pipeline in memory and check its invariants.
    Verify { config: PathBuf },
    /// Summarize a finished run directory.
    Report { dir: PathBuf },
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    match &cli.command {
        Command::Simulate { config } => {
            let config = RunConfig::load(config, &cli.overrides)?;
            let outcome = run::simulate(config)?;
            for w in &outcome.manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.directory.display());
            Ok(true)
        }
        Command::Verify { config } => {
            let config = RunConfig::load(config, &cli.overrides)?;
            let mut pipeline = Pipeline::new(config)?;
            pipeline.run_all()?;
            let report = verify::verify(&pipeline)?;
            print!("{report}");
            Ok(report.passed())
        }
        Command::Report { dir } => {
            print!("{}", report::report(dir)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
