use std::process::ExitCode;

use clap::Parser;
use rbinit_cli::{execute, Cli};

const MAX_WARNINGS: usize = 20;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.overrides.resolve().and_then(|config| execute(&cli.command, &config));
    match result {
        Ok(report) => {
            for w in report.warnings.iter().take(MAX_WARNINGS) {
                eprintln!("warning: {w}");
            }
            if report.warnings.len() > MAX_WARNINGS {
                eprintln!("warning: {} more warnings omitted", report.warnings.len() - MAX_WARNINGS);
            }
            for line in &report.summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
