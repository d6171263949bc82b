use std::path::PathBuf;

/// Failures surfaced by the command-line driver, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error{}: {message}", if *.line > 0 { format!(" on line {}", .line) } else { String::new() })]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error at {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse { line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => exit::PARSE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const IO: i32 = 5;
}

impl From<fastlight_core::Error> for CliError {
    fn from(e: fastlight_core::Error) -> Self {
        use fastlight_core::Error as E;
        match e {
            E::Invalid { .. }
            | E::DivergingGroupVelocity(_)
            | E::WindowClipsPulse { .. }
            | E::OutsideMedium { .. }
            | E::SnapshotOutsideWindow(_) => CliError::Validation(e.to_string()),
            E::OutsideWindow(_) | E::Numerical { .. } | E::NoSuperfluorescence { .. } | E::PeakAtEdge(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
