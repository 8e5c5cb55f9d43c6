use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RisoError {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("coefficient extension required: {0}")]
    ExtensionRequired(String),
    #[error("polynomial is not squarefree: {0}")]
    NotSquarefree(String),
    #[error("balls are not nested: {0}")]
    NotNested(String),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("fit ambiguous: {0}")]
    FitAmbiguous(String),
    #[error("undecidable at cap: {0}")]
    UndecidableAtCap(String),
    #[error("unsupported base: {0}")]
    UnsupportedBase(String),
    #[error("interpolation mismatch: {0}")]
    InterpolationMismatch(String),
    #[error("syntax error at {line}:{col}: {msg} (expected one of: {expected})")]
    SyntaxError { line: usize, col: usize, msg: String, expected: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, RisoError>;
