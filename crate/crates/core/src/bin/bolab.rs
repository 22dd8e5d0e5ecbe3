use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use bolab_core::cli::{run_from_file, Outcome};
use bolab_core::config::Subcommand;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Simulate,
    GaugeResidual,
    Illposed,
    Estimates,
    Admissible,
    Scaling,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Simulate => Subcommand::Simulate,
            Command::GaugeResidual => Subcommand::GaugeResidual,
            Command::Illposed => Subcommand::Illposed,
            Command::Estimates => Subcommand::Estimates,
            Command::Admissible => Subcommand::Admissible,
            Command::Scaling => Subcommand::Scaling,
        }
    }
}

/// Benjamin-Ono laboratory experiments.
#[derive(Debug, Parser)]
#[command(name = "bolab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else out/<subcommand>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cmd: Subcommand = args.command.into();
    let (outcome, dir) = run_from_file(cmd, &args.config, args.out, args.seed);
    match outcome {
        Outcome::Pass => println!("{cmd}: PASS ({})", dir.display()),
        Outcome::Fail => println!("{cmd}: FAIL ({})", dir.display()),
        Outcome::Error => {}
    }
    ExitCode::from(outcome.code() as u8)
}
