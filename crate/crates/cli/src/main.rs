use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foulwall::pipeline::{run_calibration, run_compare, run_fit, run_frozen, run_scenario, RunOptions};
use foulwall::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "foulwall", version, about = "Crystallization fouling wall function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write per-cell results
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunFlags,
        /// Dump subgrid profiles for every wall cell
        #[arg(long)]
        profiles: bool,
    },
    /// Tune the diffusivity to the scenario's target deposition rate
    Calibrate {
        config: PathBuf,
        #[command(flatten)]
        opts: RunFlags,
    },
    /// Fit interface parameters from profile CSVs
    Fit {
        /// Profile CSV, one per inlet velocity (repeatable)
        #[arg(long = "data", required = true)]
        data: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare two per-cell result CSVs
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// March the channel and save the flow field only
    Frozen {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Reuse a saved flow field
    #[arg(long)]
    frozen_flow: Option<PathBuf>,
    /// Output directory (defaults to the scenario's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the wall-cell solves
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunFlags {
    fn options(self, profiles: bool) -> RunOptions {
        RunOptions {
            frozen_flow: self.frozen_flow,
            profiles,
            out: self.out,
            jobs: self.jobs,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Io => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, opts, profiles } => {
            let dir = run_scenario(&config, &opts.options(profiles))?;
            println!("results written to {}", dir.display());
        }
        Command::Calibrate { config, opts } => {
            let (c, dir) = run_calibration(&config, &opts.options(false))?;
            println!(
                "D = {:e} m2/s (rate {:e} kg/(m2 s), {} iterations); trace in {}",
                c.diffusivity,
                c.rate,
                c.trace.len(),
                dir.display()
            );
        }
        Command::Fit { data, out } => {
            let outcome = run_fit(&data, &out)?;
            if let Some(p) = outcome.fragment {
                println!("fragment written to {}", p.display());
            }
        }
        Command::Compare { a, b, out } => {
            let c = run_compare(&a, &b, &out)?;
            println!(
                "{} stations, area-averaged ratio {}; report in {}",
                c.rows.len(),
                c.area_averaged_ratio,
                out.display()
            );
        }
        Command::Frozen { config, out } => {
            let opts = RunOptions {
                out,
                ..Default::default()
            };
            let path = run_frozen(&config, &opts)?;
            println!("flow field written to {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
