use thiserror::Error;

use crate::certificate::CertificateError;
use crate::interval::IntervalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("mode index {index} outside 1..={max}")]
    ModeOutOfRange { index: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("certification failed: {0}")]
    Certification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
