use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pucci_cli::{execute_file, Status, Task};

#[derive(Parser)]
#[command(
    name = "pucci",
    version,
    about = "Ground states and certificates for 1D Pucci equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the constant-potential ground state.
    Omega(Io),
    /// One Newton solve of the forced problem.
    Solve(Io),
    /// Continuation along a ladder of forcing levels.
    Branch(Io),
    /// Nonexistence certificate for a monotone potential.
    Certify(Io),
    /// Run a list of scenarios on worker threads.
    Sweep(Io),
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, io) = match cli.command {
        Command::Omega(io) => (Task::Omega, io),
        Command::Solve(io) => (Task::Solve, io),
        Command::Branch(io) => (Task::Branch, io),
        Command::Certify(io) => (Task::Certify, io),
        Command::Sweep(io) => (Task::Sweep, io),
    };
    let code = match execute_file(&io.config, task, &io.out) {
        Ok(outcome) => {
            if let Some(msg) = &outcome.report.message {
                eprintln!("{}: {msg}", task.as_str());
            }
            outcome.code()
        }
        Err(e) => {
            eprintln!("{}: {e}", io.config.display());
            Status::MalformedConfig.code()
        }
    };
    ExitCode::from(code as u8)
}
