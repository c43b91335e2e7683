//! Redundant survey-question detection.
//!
//! Questions are embedded through a pluggable [`providers::EmbeddingProvider`],
//! compared by cosine similarity against an immutable [`simeng::BankSnapshot`],
//! and labelled SIMILAR / DISSIMILAR with per-domain cutoffs from a
//! [`metrics::ThresholdProfile`].  The [`harness`] module runs the full
//! evaluation (confusion metrics, ROC / PR curves, cross-lingual strata) over an
//! STS dataset, and [`service`] wraps a persisted question bank behind an HTTP
//! API.
//!
//! See `examples/` for one runnable program per capability.

pub mod bow;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod prng;
pub mod providers;
pub mod service;
pub mod simeng;
pub mod sts;

pub use error::{Error, Result};
pub use model::{BinaryLabel, Domain, Lang, OrdinalScore, Question, ScoredPair, SeedSide, SimilarityValue};
