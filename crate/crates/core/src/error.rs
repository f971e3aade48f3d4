use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown fluid preset `{0}` (expected vacuum, air, ipa or tap-water)")]
    UnknownPreset(String),

    #[error("{0} is not defined for a vacuum (fluid density is zero)")]
    Inapplicable(&'static str),

    #[error("{observation} observation contradicts the stability condition: {reason}")]
    ModeMismatch {
        observation: &'static str,
        reason: String,
    },

    #[error("electrodes touch with no dielectric between them (force is singular at z = g)")]
    TouchingSingularity,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("trace too short: {0}")]
    TraceTooShort(String),

    #[error("trace has not settled: {0}")]
    NotSettled(String),

    #[error("reference response has a zero peak amplitude")]
    ZeroReference,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative solver, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::NotSettled(_) | Error::TraceTooShort(_)
        )
    }
}
