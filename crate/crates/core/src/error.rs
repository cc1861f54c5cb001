use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("top-k size must be at least 1")]
    KZero,
    #[error("invalid calibration config: {0}")]
    InvalidConfig(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("target is empty")]
    EmptyTarget,
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("target needs at least {required} frames, logits have {frames}")]
    InfeasibleTarget { frames: usize, required: usize },
    #[error("instance too large for path enumeration ({frames} frames, {labels} labels)")]
    InstanceTooLarge { frames: usize, labels: usize },
    #[error("alignment tokens do not match target text: {0}")]
    TokenMismatch(String),
    #[error("text is empty after normalization")]
    EmptyText,
    #[error("prediction and label segmentations differ: {0}")]
    SegmentationMismatch(String),
    #[error("reference rate must lie strictly between 0 and 1, got {0}")]
    DegenerateReference(f64),
    #[error("sample size must be positive")]
    ZeroSample,
    #[error("utterance {id}: {source}")]
    Utterance { id: String, source: Box<Error> },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("need at least 2 distinct speakers, found {0}")]
    TooFewSpeakers(usize),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("malformed CTCL container: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
