use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field violates its invariant.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// An argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation's preconditions do not hold for this configuration.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The configuration supports a localized (bound) photon state, so the
    /// scattering basis is incomplete.
    #[error("localized resonance: {0}")]
    LocalizedState(String),

    /// Integration, quadrature or linear-algebra failure.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed configuration text or override.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-parsable category used by the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::LocalizedState(_) => "localized",
            Error::Numerical(_) => "numerical",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::Domain(_)
                | Error::Precondition(_)
                | Error::LocalizedState(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
