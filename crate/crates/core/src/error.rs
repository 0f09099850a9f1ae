use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("swap source coordinate {0} is empty")]
    EmptySwapSource(&'static str),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("feature outside the catalog: {0}")]
    UnknownKind(String),

    #[error("degenerate evaluation: {0}")]
    Degenerate(&'static str),

    #[error("no chart-valid instance after {attempts} attempts")]
    ChartFailure { attempts: usize },

    #[error("problem is not balanced (deficit {0})")]
    Unbalanced(i64),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
