use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("unknown experiment `{0}`; see `lightfluid list-experiments`")]
    UnknownExperiment(String),

    #[error("cannot parse {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: lightfluid::Error,
    },

    #[error("strict mode: {0}")]
    Strict(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Machine-readable form of an error, printed on stderr and stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Wraps an engine error; engine config errors keep their field name.
    pub fn engine(context: impl Into<String>, source: lightfluid::Error) -> Self {
        match source {
            lightfluid::Error::Config { field, reason } => CliError::Config { field, reason },
            source => CliError::Engine {
                context: context.into(),
                source,
            },
        }
    }

    /// 2 for anything wrong with the input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::UnknownExperiment(_) | CliError::Parse { .. } => 2,
            CliError::Engine { .. } | CliError::Strict(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (kind, field) = match self {
            CliError::Config { field, .. } => ("config", Some(field.clone())),
            CliError::UnknownExperiment(_) => ("unknown_experiment", Some("experiment".to_string())),
            CliError::Parse { .. } => ("parse", None),
            CliError::Engine { .. } => ("engine", None),
            CliError::Strict(_) => ("strict", None),
            CliError::Io { .. } => ("io", None),
        };
        ErrorReport {
            kind: kind.to_string(),
            field,
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}
