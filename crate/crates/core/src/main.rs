use std::process::ExitCode;

use clap::Parser;
use spraypath::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spraypath: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
