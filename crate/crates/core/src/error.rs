use thiserror::Error;

/// Errors raised by the numerical kernels, channel models and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{what}: argument {value} outside domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The result is not representable as a finite `f64`.
    #[error("{what}: result overflows at argument {value}")]
    Overflow { what: &'static str, value: f64 },

    /// An iterative or adaptive scheme exhausted its budget.
    #[error("{what} failed to converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// A Meijer-G parameter set outside the supported instances.
    #[error("unsupported Meijer-G instance: {0}")]
    UnsupportedInstance(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empirical distribution needs at least {needed} samples, got {actual}")]
    EmptySample { needed: usize, actual: usize },

    /// An error raised at one point of a parameter sweep.
    #[error("at {parameter} = {value}: {source}")]
    AtPoint {
        parameter: String,
        value: f64,
        source: Box<Error>,
    },

    /// Invalid configuration value (names the parameter).
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }

    pub(crate) fn invalid(
        name: &'static str,
        value: impl ToString,
        reason: impl Into<String>,
    ) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by an integration or series scheme running out of budget.
    pub fn is_non_convergence(&self) -> bool {
        match self {
            Error::NonConvergence { .. } => true,
            Error::AtPoint { source, .. } => source.is_non_convergence(),
            _ => false,
        }
    }

    pub(crate) fn at(parameter: impl Into<String>, value: f64) -> impl FnOnce(Error) -> Error {
        let parameter = parameter.into();
        move |source| Error::AtPoint {
            parameter,
            value,
            source: Box::new(source),
        }
    }
}
