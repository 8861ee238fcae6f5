use thiserror::Error;

use crate::model::Basis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One message per violated parameter invariant.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("parameter file: {0}")]
    ParamFile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown parameter `{0}` (expected one of TJ, D, KL, TW, KP2, Ty, KP1, KI1, bP)")]
    UnknownParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("no oscillatory mode")]
    NoOscillatoryMode,

    #[error("simulation diverged at t = {time} s")]
    Divergence { time: f64 },

    #[error("insufficient cycles: found {peaks} positive peaks, need at least 3")]
    InsufficientCycles { peaks: usize },

    #[error("wrong basis: expected {expected}, found {found}")]
    WrongBasis { expected: Basis, found: Basis },

    #[error("resample cap exceeded: accepted {accepted} of {requested} after {attempts} draws")]
    ResampleCapExceeded {
        accepted: usize,
        requested: usize,
        attempts: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::ParamFile(_)
                | Error::InvalidConfig(_)
                | Error::UnknownParameter(_)
                | Error::WrongBasis { .. }
                | Error::Io(_)
        )
    }
}
