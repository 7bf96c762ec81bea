//! Scenario-file front end for `histories-core`: parse a JSON scenario,
//! run its commands, render a deterministic report.

use std::path::Path;

use histories_core::Tolerances;

pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::{CliError, ExecutionError, ScenarioError};
pub use report::{render_report, Format, Report, Section, Table, Value};
pub use run::run_scenario;
pub use scenario::{parse_scenario, parse_scenario_file, Command, Scenario};

/// Named tolerance sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Default,
    Strict,
}

impl Profile {
    pub fn tolerances(self) -> Tolerances {
        match self {
            Profile::Default => Tolerances::DEFAULT,
            Profile::Strict => Tolerances::STRICT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Default => "default",
            Profile::Strict => "strict",
        }
    }
}

/// Parse, run and render in one step. Loader warnings are returned
/// alongside the rendered bytes.
pub fn run_file(path: &Path, format: Format, profile: Profile) -> Result<(Vec<u8>, Vec<String>), CliError> {
    let scenario = parse_scenario_file(path)?;
    let report = run_scenario(&scenario, profile)?;
    Ok((render_report(&report, format), scenario.warnings().to_vec()))
}
