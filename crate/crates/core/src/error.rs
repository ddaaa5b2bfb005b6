use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cell systems {left} and {right} have no common refinement within the cell budget")]
    IncompatibleCellSystems { left: String, right: String },

    #[error("finite corrections would hold {count} elements (cap {cap})")]
    CorrectionsTooLarge { count: String, cap: u64 },

    #[error("probe exhausted: {0}")]
    ProbeExhausted(String),

    #[error("language is not infinite: {0}")]
    NotInfinite(String),

    #[error("languages {0} and {1} of the collection are equal")]
    DuplicateLanguage(usize, usize),

    #[error("the collection is empty")]
    EmptyCollection,

    #[error("size {n} exceeds the supported limit {max}")]
    SizeLimit { n: usize, max: usize },

    #[error("window already contains {0}")]
    DuplicateInWindow(String),

    #[error("index {index} out of range for a collection of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no adversary case could be certified within the probe horizon")]
    CaseUndetermined,

    #[error("decode failure: {0}")]
    DecodeFailure(String),

    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("verdict unknown: {0}")]
    VerdictUnknown(String),

    #[error("stream exhausted: {0}")]
    StreamExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
