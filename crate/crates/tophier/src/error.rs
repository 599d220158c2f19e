use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("ill-formed expression: {0}")]
    IllFormed(String),
    #[error("unsupported density: {0}")]
    UnsupportedDensity(String),
    #[error("singular substitution: {0}")]
    SingularSubstitution(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("polynomiality failure: {0}")]
    Polynomiality(String),
    #[error("invalid variety: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
