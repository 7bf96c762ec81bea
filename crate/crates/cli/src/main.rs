use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use histories_cli::{run_file, CliError, Format, Profile};

#[derive(Parser)]
#[command(name = "histories", version, about = "Run consistent-histories scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run every command of a scenario file and print the report.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ProfileArg::Default)]
        tolerance_profile: ProfileArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Default,
    Strict,
}

fn main() -> ExitCode {
    let Verb::Run { scenario, format, out, tolerance_profile } = Cli::parse().command;
    let format = match format {
        FormatArg::Text => Format::Text,
        FormatArg::Machine => Format::Machine,
    };
    let profile = match tolerance_profile {
        ProfileArg::Default => Profile::Default,
        ProfileArg::Strict => Profile::Strict,
    };
    match execute(&scenario, format, out, profile) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(scenario: &Path, format: Format, out: Option<PathBuf>, profile: Profile) -> Result<(), CliError> {
    let (bytes, warnings) = run_file(scenario, format, profile)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let written = match &out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    written.map_err(|e| CliError::Output {
        path: out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string()),
        message: e.to_string(),
    })
}
