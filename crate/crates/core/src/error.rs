use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation. `requirement`
    /// names the violated precondition and, where one exists, the result it
    /// comes from.
    #[error("{op}: {requirement}")]
    Domain {
        op: &'static str,
        requirement: String,
    },

    #[error("score vector is empty")]
    EmptyInput,

    #[error("working precision must be at least {min} bits, got {got}")]
    Precision { got: u32, min: u32 },

    #[error("could not parse {0:?} as a real number")]
    Parse(String),

    #[error("first-success scan exceeded {cap} rounds")]
    ScanCapExceeded { cap: u64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, requirement: impl Into<String>) -> Self {
        Error::Domain {
            op,
            requirement: requirement.into(),
        }
    }
}
