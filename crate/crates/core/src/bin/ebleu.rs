use std::process::ExitCode;

use clap::Parser;
use ebleu_core::cli::{emit, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command).and_then(|out| emit(&out, cli.command.out_path())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ebleu: {e}");
            ExitCode::from(1)
        }
    }
}
