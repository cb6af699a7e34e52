use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown system {0:?} (expected one of s1, s2, s3, s4, s1s2)")]
    UnknownSystem(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("degree cap exceeded: {0}")]
    CapExceeded(String),
    #[error("not a piecewise center: {0}")]
    NotCenter(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("numeric integration failed: {0}")]
    Integration(String),
    #[error("certificate missing: {0}")]
    Certificate(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
