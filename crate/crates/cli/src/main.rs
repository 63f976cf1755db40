use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use polent_cli::{configure_threads, render, write, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = configure_threads().and_then(|()| render(&cli)).and_then(|r| write(&r));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
