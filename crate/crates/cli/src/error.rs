use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(galerkin_core::Error),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    /// 0 success, 1 solver failure, 2 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.to_string(),
            message: err.to_string(),
        }
    }
}

impl From<galerkin_core::Error> for CliError {
    /// Input and hypothesis errors raised before any step was taken are
    /// configuration errors; everything else is a solver failure.
    fn from(e: galerkin_core::Error) -> Self {
        use galerkin_core::Error as E;
        match e {
            E::InvalidInput(msg) | E::HypothesisViolation(msg) => CliError::Config(msg),
            other => CliError::Solver(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
