use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spherekern_cli::{run, Cli};

fn main() -> ExitCode {
    let outcome = run(&Cli::parse());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(outcome.report.as_bytes());
    let _ = out.flush();
    if let Some(e) = &outcome.error {
        eprintln!("{e}");
    }
    ExitCode::from(outcome.code as u8)
}
