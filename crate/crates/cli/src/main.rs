mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::{CommandKind, Flags};

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_KERNEL: u8 = 3;

#[derive(Parser)]
#[command(name = "qsobolev", version = output::VERSION, about = "Quantum Sobolev spaces on finite Heisenberg-Weyl systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Projective-representation identities and trace orthogonality.
    Axioms,
    /// Unitarity of the quantum Fourier transform.
    Plancherel,
    /// Hausdorff-Young in both directions.
    HausdorffYoung,
    /// Norm axioms and the isometry of the weighted transform.
    SobolevNorms,
    /// Duality bound and nondegeneracy of the test family.
    Pairing,
    /// Embedding exponent arithmetic.
    Exponents,
    /// Weighted Hölder plus Hausdorff-Young embedding chain.
    Embed,
    /// Scaling sweep for the Schatten upgrade counterexample.
    Counterexample,
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Axioms => CommandKind::Axioms,
            Command::Plancherel => CommandKind::Plancherel,
            Command::HausdorffYoung => CommandKind::HausdorffYoung,
            Command::SobolevNorms => CommandKind::SobolevNorms,
            Command::Pairing => CommandKind::Pairing,
            Command::Exponents => CommandKind::Exponents,
            Command::Embed => CommandKind::Embed,
            Command::Counterexample => CommandKind::Counterexample,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::resolve(cli.command.kind(), cli.flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(Failure::Kernel(msg)) => {
            eprintln!("kernel failure: {msg}");
            return ExitCode::from(EXIT_KERNEL);
        }
    };
    match output::emit(&cfg, &outcome) {
        Ok(Some(path)) => println!("{} (report: {})", outcome.summary, path.display()),
        Ok(None) => eprintln!("{}", outcome.summary),
        Err(e) => {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}
