use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("system size {n} exceeds the limit of {max} for {what}")]
    Size {
        n: usize,
        max: usize,
        what: &'static str,
    },

    #[error("{0} has no parameter deformation; use the enumeration oracle or the probe simulation")]
    UnsupportedDeformation(&'static str),

    #[error("no closed-form cumulants for {0}; use numerical_cumulants instead")]
    NoClosedForm(&'static str),

    #[error("theta grid mismatch: {0}")]
    GridMismatch(String),

    #[error("gate-error estimation failed: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
