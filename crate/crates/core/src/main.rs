// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use proximity::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("proximity: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
