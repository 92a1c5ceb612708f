use std::io;

/// Result alias used across the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure classes, used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: out-of-range parameters, malformed files, unknown names.
    Parameter,
    /// A numerical procedure failed on valid input.
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("point ({x:.4}, {y:.4}) nm lies outside the surface")]
    OutOfBounds { x: f64, y: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("ill-conditioned input: {0}")]
    Conditioning(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("model calibration failed: {0}")]
    Model(String),

    #[error(
        "eigensolver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("valley phase extraction failed: {0}")]
    Extraction(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("zero tunability for dot {0}")]
    ZeroTunability(usize),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parameter { .. }
            | Error::OutOfBounds { .. }
            | Error::Geometry(_)
            | Error::Conditioning(_)
            | Error::ZeroTunability(_)
            | Error::Format(_)
            | Error::Io(_) => ErrorClass::Parameter,
            Error::Fit(_)
            | Error::Model(_)
            | Error::NoConvergence { .. }
            | Error::Extraction(_)
            | Error::Sampler(_) => ErrorClass::Numerical,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
