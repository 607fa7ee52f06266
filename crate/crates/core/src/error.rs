use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{count} contact structures exceed the cap of {cap}")]
    ResultTooLarge { count: u128, cap: u64 },

    #[error("norm must be nonnegative, got {0}")]
    InvalidNorm(i64),

    #[error("isometry search exceeded the cap of {cap} elements")]
    GroupTooLarge { cap: u64 },

    #[error("theorem layer and enumeration disagree: {0}")]
    CrossValidation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable name, used in serialized records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::Overflow(_) => "Overflow",
            Error::ResultTooLarge { .. } => "ResultTooLarge",
            Error::InvalidNorm(_) => "InvalidNorm",
            Error::GroupTooLarge { .. } => "GroupTooLarge",
            Error::CrossValidation(_) => "CrossValidation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
