use std::io::Write;
use std::process::ExitCode;

use birat_cli::{exit_code, render_error, run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.command.format();
    match run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(outcome.stdout.as_bytes());
            let _ = out.flush();
            ExitCode::from(outcome.code as u8)
        }
        Err(err) => {
            eprintln!("{}", render_error(&err, format));
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
