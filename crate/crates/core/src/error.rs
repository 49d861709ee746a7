use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty waveform: at least one sample is required")]
    EmptyWaveform,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("zero-norm vector in {0}")]
    ZeroNorm(&'static str),

    #[error("copy-paste precondition violated: {0}")]
    CopyPaste(String),

    #[error("no partner utterance available: {0}")]
    NoPartner(String),

    #[error("manifest row {row}: {msg}")]
    Manifest { row: usize, msg: String },

    #[error("EER needs at least one target and one non-target score (got {targets} targets, {nontargets} non-targets)")]
    SingleClass { targets: usize, nontargets: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyWaveform => "empty_waveform",
            Error::InvalidParam(_) => "invalid_param",
            Error::Shape(_) => "shape",
            Error::ZeroNorm(_) => "zero_norm",
            Error::CopyPaste(_) => "copy_paste",
            Error::NoPartner(_) => "no_partner",
            Error::Manifest { .. } => "manifest",
            Error::SingleClass { .. } => "single_class",
            Error::NonFinite(_) => "non_finite",
            Error::EmptyCorpus => "empty_corpus",
            Error::Checkpoint(_) => "checkpoint",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Wav(_) => "wav",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
