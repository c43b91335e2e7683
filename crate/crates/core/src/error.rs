use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports.
///
/// Variants map one-to-one onto the error codes exposed over the CLI and the
/// HTTP API (see [`Error::code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("score {value} out of range 1..=4 (row {row})")]
    ScoreOutOfRange { row: usize, value: i64 },
    #[error("duplicate pair ({id_a}, {id_b}) at row {row}")]
    DuplicatePair { row: usize, id_a: String, id_b: String },
    #[error("k = {k} exceeds the {available} comparison candidates for seed {seed}")]
    KTooLarge { k: usize, available: usize, seed: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("question text is empty")]
    EmptyText,
    #[error("provider {provider} does not support language {lang}")]
    UnsupportedLanguage { provider: String, lang: String },
    #[error("provider unreachable: {0}")]
    ProviderUnreachable(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("non-finite value in embedding")]
    NonfiniteValue,
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("text not present in embedding store: {0}")]
    NotInStore(String),
    #[error("bad magic bytes in embedding store")]
    BadMagic,
    #[error("embedding store is truncated")]
    TruncatedFile,
    #[error("no fixture translation for: {0}")]
    NoTranslation(String),
    #[error("translator unreachable: {0}")]
    TranslatorUnreachable(String),
    #[error("both classes are required but only one is present")]
    SingleClass,
    #[error("at least one positive label is required")]
    NoPositives,
    #[error("dataset has no cross-lingual pairs")]
    MixedLanguageRequired,
    #[error("cutoff {0} is outside [-1, 1]")]
    InvalidCutoff(f64),
    #[error("id {id} already registered with different text")]
    DuplicateId { id: String },
    #[error("bank holds provider {bank}, request used {requested}")]
    ProviderMismatch { bank: String, requested: String },
    #[error("invalid k: {0}")]
    BadK(i64),
    #[error("pair {index}: {source}")]
    AtPair {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bank is unusable after an interrupted write; reopen it")]
    Poisoned,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at_pair(index: usize, source: Error) -> Self {
        match source {
            already @ Error::AtPair { .. } => already,
            other => Error::AtPair { index, source: Box::new(other) },
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedRow { .. } => "MALFORMED_ROW",
            Error::ScoreOutOfRange { .. } => "SCORE_OUT_OF_RANGE",
            Error::DuplicatePair { .. } => "DUPLICATE_PAIR",
            Error::KTooLarge { .. } => "K_TOO_LARGE",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::EmptyInput => "EMPTY_INPUT",
            Error::EmptyCorpus => "EMPTY_CORPUS",
            Error::EmptyText => "EMPTY_TEXT",
            Error::UnsupportedLanguage { .. } => "UNSUPPORTED_LANGUAGE",
            Error::ProviderUnreachable(_) => "PROVIDER_UNREACHABLE",
            Error::DimMismatch { .. } => "DIM_MISMATCH",
            Error::NonfiniteValue => "NONFINITE_VALUE",
            Error::ZeroVector => "ZERO_VECTOR",
            Error::NotInStore(_) => "NOT_IN_STORE",
            Error::BadMagic => "BAD_MAGIC",
            Error::TruncatedFile => "TRUNCATED_FILE",
            Error::NoTranslation(_) => "NO_TRANSLATION",
            Error::TranslatorUnreachable(_) => "TRANSLATOR_UNREACHABLE",
            Error::SingleClass => "SINGLE_CLASS",
            Error::NoPositives => "NO_POSITIVES",
            Error::MixedLanguageRequired => "MIXED_LANGUAGE_REQUIRED",
            Error::InvalidCutoff(_) => "INVALID_CUTOFF",
            Error::DuplicateId { .. } => "DUPLICATE_ID",
            Error::ProviderMismatch { .. } => "PROVIDER_MISMATCH",
            Error::BadK(_) => "BAD_K",
            Error::AtPair { source, .. } => source.code(),
            Error::Config(_) => "CONFIG",
            Error::Poisoned => "POISONED",
            Error::Io { .. } => "IO",
            Error::Json(_) => "JSON",
            Error::Csv(_) => "CSV",
        }
    }
}
