use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector {0} has (near-)zero norm")]
    ZeroNormVector(usize),

    #[error("dialogue has {n} utterances but the model supports at most {max}")]
    DialogueTooLong { n: usize, max: usize },

    #[error("fused matrix mean {mean} is not above the degeneracy guard")]
    DegenerateMean { mean: f64 },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("window k = {k} must be smaller than n = {n}")]
    WindowTooLarge { k: usize, n: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("dialogue {dialogue}: index {index} outside [1, {n}]")]
    IndexOutOfRange {
        dialogue: String,
        index: usize,
        n: usize,
    },

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }
}
