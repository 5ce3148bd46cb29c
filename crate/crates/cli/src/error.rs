use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("--{flag}: {message}")]
    Usage { flag: String, message: String },

    #[error(transparent)]
    Core(multinacci::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Flag name for a library validation field.
fn flag_for(field: &str) -> &str {
    match field {
        "term_count" => "terms",
        "initial_values" => "init",
        "max_iterations" => "max-iter",
        "max_order" => "max-order",
        other => other,
    }
}

impl From<multinacci::Error> for CliError {
    fn from(err: multinacci::Error) -> Self {
        match err {
            multinacci::Error::Validation { field, reason } => {
                CliError::usage(flag_for(field), reason)
            }
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn usage(flag: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Usage {
            flag: flag.into(),
            message: message.into(),
        }
    }

    /// 2 for anything the caller can fix by changing flags, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Core(multinacci::Error::Validation { .. })
            | CliError::Core(multinacci::Error::GridTooLarge { .. }) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}
