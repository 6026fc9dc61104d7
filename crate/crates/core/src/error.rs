use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or parameter failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation was invoked outside its contract (stepping a stopped
    /// test, deciding before stopping, empty inputs).
    #[error("usage error: {0}")]
    Usage(String),

    /// An argument lies outside a function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine could not produce a trustworthy result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The analytic pipeline does not apply to the given scenario.
    #[error("analysis inapplicable: {0}")]
    Inapplicable(String),

    /// Threshold search ran out of budget before bracketing the target.
    #[error(
        "calibration failed: target P_FA {target} not bracketed; nearest achieved {nearest_pfa} \
         at local={nearest_local}, beta={nearest_beta}"
    )]
    Calibration {
        target: f64,
        nearest_pfa: f64,
        nearest_local: f64,
        nearest_beta: f64,
    },

    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn usage_err(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
