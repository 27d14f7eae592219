use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use revqe::cli::{exit_code, run, Subcommand, EXIT_VALIDATION};
use revqe::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Spectrum,
    Qlimit,
    Partition,
    Window,
    QeStat,
    Weyl,
    Legendre,
    Zonal,
    Flow,
    Verify,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Spectrum => Subcommand::Spectrum,
            Command::Qlimit => Subcommand::Qlimit,
            Command::Partition => Subcommand::Partition,
            Command::Window => Subcommand::Window,
            Command::QeStat => Subcommand::QeStat,
            Command::Weyl => Subcommand::Weyl,
            Command::Legendre => Subcommand::Legendre,
            Command::Zonal => Subcommand::Zonal,
            Command::Flow => Subcommand::Flow,
            Command::Verify => Subcommand::Verify,
        }
    }
}

/// Symmetry-reduced quantum ergodicity experiments on spheres of revolution.
#[derive(Debug, Parser)]
#[command(name = "revqe", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value` patch of the configuration; dotted keys reach nested fields.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match ExperimentConfig::load(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("revqe: {e}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let cmd = Subcommand::from(args.command);
    let result = run(cmd, &config, args.out.as_deref());
    match &result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.acceptance_failed {
                eprintln!("revqe: acceptance checks failed (see verify.txt)");
            }
        }
        Err(e) => eprintln!("revqe: {}: {e}", cmd.name()),
    }
    ExitCode::from(exit_code(&result) as u8)
}
