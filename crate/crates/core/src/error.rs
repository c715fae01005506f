use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("index not finite")]
    IndexNotFinite,
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{what}: cap exceeded (required {required}, cap {cap})")]
    CapExceeded {
        what: String,
        required: u128,
        cap: u128,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("axiom {axiom} fails: {detail}")]
    Axiom { axiom: &'static str, detail: String },
    #[error("overlap: {0}")]
    Overlap(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
