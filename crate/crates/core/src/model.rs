//! Shared domain types and the ordinal-to-binary label rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    En,
    Ko,
}

impl Lang {
    pub const ALL: [Lang; 2] = [Lang::En, Lang::Ko];

    pub fn code(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Ko => "ko",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Lang::En),
            "ko" => Ok(Lang::Ko),
            other => Err(format!("unknown language code {other:?}")),
        }
    }
}

/// Health-lifelog domain of a question.  `Other` items are scored against the
/// global cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "DL")]
    DietaryLifestyle,
    #[serde(rename = "HLE")]
    LivingEnvironment,
    #[serde(rename = "PA")]
    PhysicalActivity,
    #[serde(rename = "SLEEP")]
    Sleep,
    #[serde(rename = "STRESS")]
    Stress,
    #[serde(rename = "OTHER")]
    Other,
}

impl Domain {
    /// The five lifelog domains, in reporting order.
    pub const LIFELOG: [Domain; 5] = [
        Domain::DietaryLifestyle,
        Domain::LivingEnvironment,
        Domain::PhysicalActivity,
        Domain::Sleep,
        Domain::Stress,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Domain::DietaryLifestyle => "DL",
            Domain::LivingEnvironment => "HLE",
            Domain::PhysicalActivity => "PA",
            Domain::Sleep => "SLEEP",
            Domain::Stress => "STRESS",
            Domain::Other => "OTHER",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DL" | "DIET" => Ok(Domain::DietaryLifestyle),
            "HLE" => Ok(Domain::LivingEnvironment),
            "PA" => Ok(Domain::PhysicalActivity),
            "SLEEP" => Ok(Domain::Sleep),
            "STRESS" => Ok(Domain::Stress),
            "OTHER" => Ok(Domain::Other),
            other => Err(format!("unknown domain {other:?}")),
        }
    }
}

/// Deterministic id for a question without a caller-supplied one.
pub fn content_id(text: &str, lang: Lang) -> String {
    let mut hasher = Sha256::new();
    hasher.update(lang.code().as_bytes());
    hasher.update([0u8]);
    hasher.update(text.trim().as_bytes());
    let digest = hasher.finalize();
    format!("q{}", hex::encode(&digest[..8]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub lang: Lang,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Question {
    /// Builds a question, assigning a content-hash id when `id` is `None`.
    pub fn new(id: Option<String>, text: impl Into<String>, lang: Lang, domain: Domain) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        let id = match id {
            Some(id) if !id.trim().is_empty() => id,
            _ => content_id(&text, lang),
        };
        Ok(Question { id, text, lang, domain, source: None })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

/// Human similarity score on the 4-point protocol (4 = minor wording
/// differences, 1 = different core topic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct OrdinalScore(u8);

impl OrdinalScore {
    pub const ALL: [OrdinalScore; 4] = [OrdinalScore(1), OrdinalScore(2), OrdinalScore(3), OrdinalScore(4)];

    pub fn new(value: u8) -> Option<Self> {
        (1..=4).contains(&value).then_some(OrdinalScore(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for OrdinalScore {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, Self::Error> {
        OrdinalScore::new(value).ok_or_else(|| format!("score {value} outside 1..=4"))
    }
}

impl From<OrdinalScore> for u8 {
    fn from(s: OrdinalScore) -> u8 {
        s.0
    }
}

/// Ordered so that `Dissimilar < Similar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BinaryLabel {
    Dissimilar,
    Similar,
}

impl BinaryLabel {
    pub fn is_similar(self) -> bool {
        self == BinaryLabel::Similar
    }

    pub fn flip(self) -> Self {
        match self {
            BinaryLabel::Similar => BinaryLabel::Dissimilar,
            BinaryLabel::Dissimilar => BinaryLabel::Similar,
        }
    }
}

/// Scores 3 and 4 are similar, 1 and 2 dissimilar.
pub fn binarize(score: OrdinalScore) -> BinaryLabel {
    if score.get() >= 3 {
        BinaryLabel::Similar
    } else {
        BinaryLabel::Dissimilar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedSide {
    #[serde(rename = "A")]
    AIsSeed,
    #[serde(rename = "B")]
    BIsSeed,
}

impl FromStr for SeedSide {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "A_IS_SEED" => Ok(SeedSide::AIsSeed),
            "B" | "B_IS_SEED" => Ok(SeedSide::BIsSeed),
            other => Err(format!("unknown seed side {other:?}")),
        }
    }
}

impl SeedSide {
    pub fn code(self) -> &'static str {
        match self {
            SeedSide::AIsSeed => "A",
            SeedSide::BIsSeed => "B",
        }
    }
}

/// One STS row: two questions and their human scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub pair_id: String,
    pub a: Question,
    pub b: Question,
    pub score1: Option<OrdinalScore>,
    pub score2: Option<OrdinalScore>,
    pub final_score: OrdinalScore,
    pub seed_side: SeedSide,
}

impl ScoredPair {
    /// Checks that agreeing annotators agree with the final score.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if let (Some(s1), Some(s2)) = (self.score1, self.score2) {
            if s1 == s2 && s1 != self.final_score {
                return Err(format!(
                    "annotators agree on {} but final score is {}",
                    s1.get(),
                    self.final_score.get()
                ));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> BinaryLabel {
        binarize(self.final_score)
    }

    pub fn seed(&self) -> &Question {
        match self.seed_side {
            SeedSide::AIsSeed => &self.a,
            SeedSide::BIsSeed => &self.b,
        }
    }

    pub fn comparison(&self) -> &Question {
        match self.seed_side {
            SeedSide::AIsSeed => &self.b,
            SeedSide::BIsSeed => &self.a,
        }
    }

    /// Domain of the pair, taken from the seed question.
    pub fn domain(&self) -> Domain {
        self.seed().domain
    }

    /// Seed-language to comparison-language direction, e.g. `EN-KO`.
    pub fn pairing(&self) -> String {
        format!(
            "{}-{}",
            self.seed().lang.code().to_ascii_uppercase(),
            self.comparison().lang.code().to_ascii_uppercase()
        )
    }

    pub fn is_cross_lingual(&self) -> bool {
        self.a.lang != self.b.lang
    }
}

/// Cosine similarity, always within `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityValue(f64);

impl SimilarityValue {
    /// Clamps into `[-1, 1]`.  NaN maps to 0.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            SimilarityValue(0.0)
        } else {
            SimilarityValue(value.clamp(-1.0, 1.0))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}
