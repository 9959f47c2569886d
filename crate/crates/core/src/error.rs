use thiserror::Error;

/// Error taxonomy shared by every module. The CLI maps the variants onto
/// distinct exit codes (config = 2, numeric = 3, io/format = 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure in {context}: {what}")]
    Numeric { context: String, what: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("query outside domain: {0}")]
    OutOfDomain(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(context: impl Into<String>, what: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
            what: what.into(),
        }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
