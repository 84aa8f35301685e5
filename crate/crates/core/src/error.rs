use std::fmt;

use crate::bn::ValidationReport;
use crate::io::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The caller asked for something the inputs cannot answer (bad id, bad flag value).
    #[error("{0}")]
    Usage(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("impossible evidence: P({0}) = 0")]
    ImpossibleEvidence(EvidenceDisplay),

    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// Input data is malformed in a way that is not a syntax error (calibration records etc).
    #[error("{0}")]
    Data(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Usage errors map to exit code 2 in the CLI, everything else to 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::UnknownVariable(_) | Error::UnknownComponent(_)
        )
    }
}

/// Rendered form of an evidence set, kept in errors so they stay `'static`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceDisplay(pub String);

impl fmt::Display for EvidenceDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
