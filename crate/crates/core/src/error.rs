use thiserror::Error;

/// Errors raised by the exact engines. Every variant names the violated
/// contract so callers can surface it unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated in {op}: {reason}")]
    Precondition { op: &'static str, reason: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot decide {0} from an enclosure; an exact value is required")]
    Undecidable(String),
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn pre(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precondition { .. } => "precondition",
            Error::Dimension(_) => "dimension",
            Error::Undecidable(_) => "undecidable",
            Error::NoWitness(_) => "no_witness",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
