use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("decoder diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("invalid bracket: {0}")]
    Bracketing(String),

    #[error("enumeration budget exceeded: {0} candidate messages")]
    Enumeration(u128),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::Encoding(_)
            | Error::Dimension(_)
            | Error::NumericDomain(_)
            | Error::Enumeration(_)
            | Error::Parse(_) => 2,
            Error::Bracketing(_) | Error::Divergence { .. } => 3,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
