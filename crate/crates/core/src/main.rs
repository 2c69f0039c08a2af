use clap::{Parser, Subcommand};
use dpg_transport::driver::{convergence_csv, run_adaptive, run_conjecture, run_verify, ExperimentConfig};
use dpg_transport::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dpg-transport", about = "Adaptive DPG solver for steady linear transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive (or uniform) loop and write CSV/mesh output.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the seeded invariant suite and print its report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the downwind-enrichment experiments and print the table.
    Conjecture {
        #[arg(long)]
        config: PathBuf,
    },
}

const VERIFY_FAILED: u8 = 3;

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_adaptive(&cfg, cfg.output.as_deref())?;
            print!("{}", convergence_csv(&out.records));
            Ok(0)
        }
        Command::Verify { config, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_verify(&cfg)?;
            print!("{}", report.render());
            Ok(if report.all_passed() { 0 } else { VERIFY_FAILED })
        }
        Command::Conjecture { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let table = run_conjecture(&cfg)?;
            print!("{}", table.to_csv());
            for s in &table.skipped {
                eprintln!("scenario {s} skipped: no Type-II cell marked");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {:#}", anyhow::Error::new(e));
            ExitCode::from(code as u8)
        }
    }
}
