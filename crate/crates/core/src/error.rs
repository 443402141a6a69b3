use thiserror::Error;

use crate::lp::LpError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} lies outside [-1, 1]")]
    Domain(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degree bound {requested} exceeds the supported cap {cap}")]
    DegreeCap { requested: usize, cap: usize },
    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
