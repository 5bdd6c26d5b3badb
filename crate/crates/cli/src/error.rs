use std::process::ExitCode;

/// Failure classes with stable exit codes: 2 config, 3 domain, 4 I/O.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        })
    }
}

impl From<crisiswatch_core::StoreError> for CliError {
    fn from(e: crisiswatch_core::StoreError) -> Self {
        use crisiswatch_core::StoreError as E;
        match e {
            E::Model(_) | E::InvalidCursor | E::InvalidPageSize(_) => CliError::Domain(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}
