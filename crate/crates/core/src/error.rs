use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported storage format {0}")]
    UnsupportedFormat(String),
    #[error("truncated signal file: {0}")]
    TruncatedFile(String),
    #[error("missing signal file {0}")]
    MissingSignalFile(String),
    #[error("sample {value} does not fit storage format {format}")]
    SampleOutOfRange { value: i32, format: u32 },
    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid band {low}-{high} Hz for sampling rate {fs} Hz")]
    InvalidBand { low: f64, high: f64, fs: f64 },
    #[error("signal too short: {len} samples, need at least {required}")]
    SignalTooShort { len: usize, required: usize },
    #[error("beat window too narrow for fiducial search")]
    WindowTooNarrow,

    #[error("not enough beats: have {have}, need {need}")]
    NotEnoughBeats { have: usize, need: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),
    #[error("non-finite feature value")]
    NonFiniteFeature,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("too few samples: {0} (need at least 3)")]
    TooFewSamples(usize),
    #[error("zero variance input")]
    ZeroVariance,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("train/validation leakage: {0}")]
    Leakage(String),
}
