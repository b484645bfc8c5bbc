#![forbid(unsafe_code)]

use std::process::ExitCode;

use clap::Parser;

mod request;

fn main() -> ExitCode {
    let cli = request::Cli::parse();
    match request::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
