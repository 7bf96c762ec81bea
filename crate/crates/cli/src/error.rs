use thiserror::Error;

/// Problems with the scenario file itself. These map to exit status 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown reference `{name}` in {context}")]
    UnknownReference { name: String, context: String },
    #[error("dimension mismatch in {entity}: expected {expected}, found {found}")]
    DimensionMismatch { entity: String, expected: usize, found: usize },
    #[error("invalid {entity}: {message}")]
    Invalid { entity: String, message: String },
}

/// A command could not be carried out. Maps to exit status 3.
#[derive(Debug, Clone, Error)]
#[error("command {index} ({kind}) failed: {source}")]
pub struct ExecutionError {
    pub index: usize,
    pub kind: &'static str,
    #[source]
    pub source: histories_core::Error,
}

/// Everything the command-line front end can fail with.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Execution(#[from] ExecutionError),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) => 2,
            CliError::Execution(_) | CliError::Output { .. } => 3,
        }
    }
}
