mod args;
mod commands;
mod points;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, OutputArgs};
use report::{write_atomic, CliError, RunReport, EXIT_FAIL, EXIT_PASS};

fn run(cli: &Cli) -> Result<u8, CliError> {
    let start = Instant::now();
    let (report, output): (RunReport, &OutputArgs) = match &cli.command {
        Command::Identities(a) => (commands::identities(a)?, &a.output),
        Command::Frobenius(a) => (commands::frobenius(a)?, &a.output),
        Command::Wdvv(a) => (commands::wdvv(a)?, &a.output),
        Command::Bcn(a) => (commands::bcn(a)?, &a.output),
        Command::Fisher(a) => (commands::fisher(a)?, &a.output),
        Command::ParseCheck(a) => (commands::parse_check(a)?, &a.output),
    };
    let mut report = report;
    if !output.omit_duration {
        report.duration_seconds = Some(start.elapsed().as_secs_f64());
    }
    let rendered = report.render(output.format);
    match &output.out {
        Some(path) => write_atomic(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
