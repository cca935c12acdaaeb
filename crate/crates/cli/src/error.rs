use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const RESOURCE_LIMIT: u8 = 3;
    pub const IO: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown check `{0}` (expected one of: {list}, all)", list = crate::commands::CHECKS.join(", "))]
    UnknownCheck(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] chaoskit::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(chaoskit::Error::ResourceLimit { .. }) => exit::RESOURCE_LIMIT,
            CliError::Io { .. } => exit::IO,
            _ => exit::INVALID,
        }
    }
}
