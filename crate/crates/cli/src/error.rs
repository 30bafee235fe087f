use finsler_lab::Error;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_PREDICATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EVAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Eval {
        context: String,
        #[source]
        source: Error,
    },

    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Input errors (bad expressions, names, arguments) count as usage errors.
    pub fn from_core(e: Error) -> CliError {
        match e.root() {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::VariableOutOfRange { .. }
            | Error::UnboundParameter(_)
            | Error::Invalid(_)
            | Error::Catalog(_) => CliError::Usage(e.to_string()),
            _ => CliError::Eval {
                context: "building the metric".into(),
                source: e,
            },
        }
    }

    pub fn eval(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
        let context = context.into();
        move |source| CliError::Eval { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Eval { .. } | CliError::Io { .. } => EXIT_EVAL,
        }
    }
}
