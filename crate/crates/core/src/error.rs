use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("depth error: {0}")]
    Depth(String),
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("data error: {0}")]
    Data(String),
    /// Refinement did not settle; carries the last two iterates.
    #[error("accuracy error: {msg} (last {last:e}, previous {previous:e})")]
    Accuracy { msg: String, last: f64, previous: f64 },
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("at scale {scale}: {source}")]
    AtScale {
        scale: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn at_scale(self, scale: f64) -> Self {
        Error::AtScale { scale, source: Box::new(self) }
    }
}
