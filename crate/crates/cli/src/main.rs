//! `ancred`: reverse-Bayes credibility analysis from the command line.

mod commands;
mod figures;
mod input;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AnalyseArgs, ExtrinsicArgs, Output, PriorArgs, SimulateArgs};
use figures::FigureArgs;
use output::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ancred", version, about = "Reverse-Bayes analysis of credibility")]
struct Cli {
    /// Emit a versioned JSON envelope instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Intrinsic credibility of a single study.
    Analyse(AnalyseArgs),
    /// Extrinsic credibility of a study against external evidence.
    Extrinsic(ExtrinsicArgs),
    /// The sceptical prior of a significant study.
    Prior(PriorArgs),
    /// Null distribution of the extrinsic p-value by simulation.
    Simulate(SimulateArgs),
    /// CSV data behind the standard plots.
    FigureData(FigureArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyse(_) => "analyse",
            Command::Extrinsic(_) => "extrinsic",
            Command::Prior(_) => "prior",
            Command::Simulate(_) => "simulate",
            Command::FigureData(_) => "figure-data",
        }
    }

    fn run(&self) -> CliResult<Output> {
        match self {
            Command::Analyse(args) => commands::analyse(args),
            Command::Extrinsic(args) => commands::extrinsic(args),
            Command::Prior(args) => commands::prior(args),
            Command::Simulate(args) => commands::simulate(args),
            Command::FigureData(args) => figures::figure_data(args),
        }
    }
}

fn emit(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        stdout.write_all(b"\n")?;
    }
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go through clap untouched
            if e.use_stderr() && std::env::args().any(|a| a == "--json") {
                let command = std::env::args().nth(1).unwrap_or_default();
                let err = CliError::Usage(e.kind().to_string());
                let _ = emit(&err.to_json(&command));
            }
            e.exit();
        }
    };

    let name = cli.command.name();
    let result = cli
        .command
        .run()
        .and_then(|out| emit(if cli.json { &out.json } else { &out.human }));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe (`ancred ... | head`) is not an error
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(err) => {
            if cli.json {
                let _ = emit(&err.to_json(name));
            }
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
