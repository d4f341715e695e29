use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const CERTIFICATE: i32 = 4;
    pub const ACCEPTANCE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{origin}: {msg}")]
    Parse { origin: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] varelax_core::Error),
}

impl CliError {
    pub fn parse(origin: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Parse {
            origin: origin.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use varelax_core::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } | CliError::Io { .. } => exit::PARSE,
            CliError::Core(e) => match e {
                E::Infeasible(_) => exit::INFEASIBLE,
                E::CertificateFailure(_) | E::Inconsistent(_) => exit::CERTIFICATE,
                E::Degenerate(_) | E::InvalidInput(_) | E::OutOfDomain { .. } | E::OutsideHull { .. } => {
                    exit::PARSE
                }
            },
        }
    }
}
