use thiserror::Error;

/// Errors raised by the tail-chain toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The moment equation never changed sign while expanding the bracket.
    #[error("no finite tail index: moment equation has no sign change up to a = {upper}")]
    NoFiniteTailIndex { upper: f64 },

    /// Tail index and model parameters disagree (normalization of the adjoint law fails).
    #[error("inconsistent tail index: normalization {normalization} deviates from 1")]
    Consistency { normalization: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} after {evaluations} evaluations")]
    Quadrature { estimate: f64, evaluations: usize },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("degenerate bootstrap pool: all adjoint weights are zero")]
    DegeneratePool,

    #[error("insufficient conditioning mass: {count} draws satisfy the conditioning event (need {required})")]
    InsufficientConditioning { count: u64, required: u64 },

    #[error("too few threshold exceedances: {count} (need {required})")]
    ExceedanceStarvation { count: u64, required: u64 },

    #[error("no exceedances of the threshold {threshold}")]
    NoExceedances { threshold: f64 },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("inconsistent moment: {moment} exceeds tail constant {c}")]
    Inconsistent { moment: f64, c: f64 },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by invalid user input rather than numerics.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::NoExceedances { .. }
                | Error::ExceedanceStarvation { .. }
                | Error::InsufficientConditioning { .. }
        )
    }
}
