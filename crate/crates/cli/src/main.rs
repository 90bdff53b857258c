use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use drsplit_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = cli.command.validate() {
        Cli::command().error(ErrorKind::ValueValidation, msg).exit();
    }
    eprintln!("resolved config: {:?}", cli.command);
    let stdout = std::io::stdout();
    match drsplit_cli::run::run(&cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
