use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("generator not full rank (rank {rank}, expected {expected})")]
    GeneratorRank { rank: usize, expected: usize },

    #[error("generator and parity-check matrices are not orthogonal")]
    NotOrthogonal,

    #[error("extension undefined: parity-check matrix has {0} row(s), need at least 2")]
    ExtensionUndefined(usize),

    #[error("degenerate node: {0}")]
    DegenerateNode(String),

    #[error("codebook enumeration refused for k = {0} (limit 20)")]
    CodebookTooLarge(usize),

    #[error("unknown code `{0}`")]
    UnknownCode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint does not match this code: {0}")]
    FingerprintMismatch(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
