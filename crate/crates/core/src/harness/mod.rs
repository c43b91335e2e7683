//! End-to-end evaluation over an STS dataset.
//!
//! Similarities are computed once; every stratum (language pairing x domain,
//! with pooled `ALL` rows) is then scored from the same array.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{curves_path, emit_report, ReportFormat};

use crate::bow::{build_vocabulary, Vocabulary};
use crate::error::{Error, Result};
use crate::metrics::{
    calibrate_profiles, confusion_at, pr_auc, prf, roc_auc, ConfusionCounts, CurvePoints, Objective, ThresholdProfile,
};
use crate::model::{BinaryLabel, Domain, Lang};
use crate::providers::{BowProvider, EmbeddingProvider, Translator};
use crate::simeng::{pairwise_scores, Cosine};
use crate::sts::StsDataset;

/// Label used for pooled strata.
pub const ALL: &str = "ALL";

/// Cutoff source for an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileChoice {
    Fixed(ThresholdProfile),
    /// Calibrate in-sample, separately for each language pairing.
    Auto(Objective),
}

/// Cutoff used when calibration is impossible (a single class throughout).
pub const FALLBACK_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub pairing: String,
    pub domain: String,
    pub provider: String,
    pub n: usize,
    pub positives: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when the stratum has a single class.
    pub roc_auc: Option<f64>,
    /// `None` when the stratum has no positives.
    pub pr_auc: Option<f64>,
    pub cutoff: f64,
    pub confusion: ConfusionCounts,
    pub degenerate_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumCurves {
    pub pairing: String,
    pub domain: String,
    pub roc: Option<CurvePoints>,
    pub pr: Option<CurvePoints>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub pair_id: String,
    pub pairing: String,
    pub domain: Domain,
    pub similarity: f64,
    pub label: BinaryLabel,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub provider_id: String,
    pub dataset_hash: String,
    /// Calibration objective, `None` for a fixed profile.
    pub objective: Option<Objective>,
    pub translated: bool,
    /// Cutoffs were fitted on the evaluated pairs themselves.
    pub in_sample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: ReportConfig,
    pub rows: Vec<MetricsRow>,
    pub curves: Vec<StratumCurves>,
    /// Profile applied per pairing, plus the pooled one under `ALL`.
    pub profiles: BTreeMap<String, ThresholdProfile>,
    pub scores: Vec<PairScore>,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub fn row(&self, pairing: &str, domain: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.pairing == pairing && r.domain == domain)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

struct Stratum {
    pairing: String,
    domain: String,
    members: Vec<usize>,
    cutoff: f64,
}

pub fn evaluate(
    dataset: &StsDataset,
    provider: &dyn EmbeddingProvider,
    translator: Option<&dyn Translator>,
    profile: &ProfileChoice,
) -> Result<MetricsReport> {
    let pairs = dataset.pairs();
    let texts: Vec<_> = pairs.iter().map(|p| (p.a.text.as_str(), p.a.lang, p.b.text.as_str(), p.b.lang)).collect();
    let cosines = pairwise_scores(&texts, provider, translator)?;
    let desc = provider.descriptor();
    let translated =
        translator.is_some() && pairs.iter().any(|p| !desc.supports(p.a.lang) || !desc.supports(p.b.lang));
    evaluate_scores(dataset, &cosines, &desc.provider_id, translated, profile)
}

/// [`evaluate`] over similarities computed elsewhere, one per pair in order.
pub fn evaluate_scores(
    dataset: &StsDataset,
    cosines: &[Cosine],
    provider_id: &str,
    translated: bool,
    profile: &ProfileChoice,
) -> Result<MetricsReport> {
    let pairs = dataset.pairs();
    if cosines.len() != pairs.len() {
        return Err(Error::LengthMismatch { left: pairs.len(), right: cosines.len() });
    }
    let scores: Vec<PairScore> = pairs
        .iter()
        .zip(cosines)
        .map(|(p, c)| PairScore {
            pair_id: p.pair_id.clone(),
            pairing: p.pairing(),
            domain: p.domain(),
            similarity: c.get(),
            label: p.label(),
            degenerate: c.degenerate,
        })
        .collect();

    let mut by_pairing: BTreeMap<String, BTreeMap<Domain, Vec<usize>>> = BTreeMap::new();
    for (i, s) in scores.iter().enumerate() {
        by_pairing.entry(s.pairing.clone()).or_default().entry(s.domain).or_default().push(i);
    }

    let mut warnings = Vec::new();
    let dataset_hash = dataset.content_hash();
    let mut profiles = BTreeMap::new();
    let calibrate = |members: &[usize], warnings: &mut Vec<String>, scope: &str| -> ThresholdProfile {
        let obj = match profile {
            ProfileChoice::Fixed(p) => return p.clone(),
            ProfileChoice::Auto(obj) => *obj,
        };
        let samples: Vec<_> = members.iter().map(|&i| (scores[i].domain, scores[i].similarity, scores[i].label)).collect();
        match calibrate_profiles(&samples, obj, &dataset_hash) {
            Ok(cal) => {
                warnings.extend(cal.warnings.iter().map(|w| format!("{scope}: {w}")));
                cal.into_profile()
            }
            Err(e) => {
                warnings.push(format!("{scope}: calibration failed ({}); using cutoff {FALLBACK_CUTOFF}", e.code()));
                let mut p = ThresholdProfile::fixed(FALLBACK_CUTOFF);
                p.objective = obj;
                p.provenance.dataset_id = dataset_hash.clone();
                p
            }
        }
    };

    let mut strata = Vec::new();
    for (pairing, domains) in &by_pairing {
        let members: Vec<usize> = {
            let mut m: Vec<usize> = domains.values().flatten().copied().collect();
            m.sort_unstable();
            m
        };
        let p = calibrate(&members, &mut warnings, pairing);
        for (d, idx) in domains {
            strata.push(Stratum { pairing: pairing.clone(), domain: d.code().into(), members: idx.clone(), cutoff: p.cutoff_for(*d) });
        }
        strata.push(Stratum { pairing: pairing.clone(), domain: ALL.into(), members, cutoff: p.global });
        profiles.insert(pairing.clone(), p);
    }
    if by_pairing.len() > 1 {
        let members: Vec<usize> = (0..scores.len()).collect();
        let p = calibrate(&members, &mut warnings, ALL);
        strata.push(Stratum { pairing: ALL.into(), domain: ALL.into(), members, cutoff: p.global });
        profiles.insert(ALL.into(), p);
    }

    let provider_id = provider_id.to_string();
    let results: Vec<(MetricsRow, StratumCurves, Vec<String>)> =
        strata.par_iter().map(|s| score_stratum(s, &scores, &provider_id)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let mut curves = Vec::with_capacity(results.len());
    for (r, c, w) in results {
        rows.push(r);
        curves.push(c);
        warnings.extend(w);
    }

    Ok(MetricsReport {
        config: ReportConfig {
            provider_id,
            dataset_hash,
            objective: match profile {
                ProfileChoice::Fixed(_) => None,
                ProfileChoice::Auto(o) => Some(*o),
            },
            translated,
            in_sample: matches!(profile, ProfileChoice::Auto(_)),
        },
        rows,
        curves,
        profiles,
        scores,
        warnings,
    })
}

fn score_stratum(s: &Stratum, scores: &[PairScore], provider: &str) -> Result<(MetricsRow, StratumCurves, Vec<String>)> {
    let sims: Vec<f64> = s.members.iter().map(|&i| scores[i].similarity).collect();
    let truth: Vec<BinaryLabel> = s.members.iter().map(|&i| scores[i].label).collect();
    let confusion = confusion_at(&sims, &truth, s.cutoff)?;
    let m = prf(&confusion);
    let mut warnings = Vec::new();
    let scope = format!("{}/{}", s.pairing, s.domain);
    let roc = match roc_auc(&sims, &truth) {
        Ok(r) => Some(r),
        Err(Error::SingleClass) => {
            warnings.push(format!("{scope}: single class, ROC AUC undefined"));
            None
        }
        Err(e) => return Err(e),
    };
    let pr = match pr_auc(&sims, &truth) {
        Ok(r) => Some(r),
        Err(Error::NoPositives) => None,
        Err(e) => return Err(e),
    };
    let row = MetricsRow {
        pairing: s.pairing.clone(),
        domain: s.domain.clone(),
        provider: provider.to_string(),
        n: sims.len(),
        positives: truth.iter().filter(|t| t.is_similar()).count(),
        accuracy: m.accuracy,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        roc_auc: roc.as_ref().map(|r| r.auc),
        pr_auc: pr.as_ref().map(|r| r.auc),
        cutoff: s.cutoff,
        confusion,
        degenerate_pairs: s.members.iter().filter(|&&i| scores[i].degenerate).count(),
    };
    let curves = StratumCurves {
        pairing: s.pairing.clone(),
        domain: s.domain.clone(),
        roc: roc.map(|r| r.curve),
        pr: pr.map(|r| r.curve),
    };
    Ok((row, curves, warnings))
}

/// Evaluates only the cross-lingual pairs, stratified by seed-language
/// direction (`EN-KO`, `KO-EN`).
pub fn cross_lingual_evaluate(
    dataset: &StsDataset,
    provider: &dyn EmbeddingProvider,
    translator: Option<&dyn Translator>,
    profile: &ProfileChoice,
) -> Result<MetricsReport> {
    let mixed = dataset.filter(|p| p.is_cross_lingual()).ok_or(Error::MixedLanguageRequired)?;
    evaluate(&mixed, provider, translator, profile)
}

/// English text of every question in `dataset`, translating the rest.
pub fn english_corpus(dataset: &StsDataset, translator: Option<&dyn Translator>) -> Result<Vec<String>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for q in dataset.questions() {
        if !seen.insert((q.text.as_str(), q.lang)) {
            continue;
        }
        let text = match (q.lang, translator) {
            (Lang::En, _) => q.text.clone(),
            (lang, Some(t)) => t.translate(&q.text, lang, Lang::En)?,
            (lang, None) => {
                return Err(Error::UnsupportedLanguage { provider: "bow".into(), lang: lang.code().into() })
            }
        };
        out.push(text);
    }
    Ok(out)
}

/// Vocabulary over the (translated) dataset, wrapped as a provider.
pub fn bow_provider_for(dataset: &StsDataset, translator: Option<&dyn Translator>) -> Result<BowProvider> {
    let vocab: Vocabulary = build_vocabulary(&english_corpus(dataset, translator)?)?;
    BowProvider::new(vocab)
}
