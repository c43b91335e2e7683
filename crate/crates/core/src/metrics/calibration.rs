use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::check_lengths;
use crate::error::{Error, Result};
use crate::model::{BinaryLabel, Domain};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Objective {
    /// TPR - FPR.
    #[default]
    YoudenJ,
    MaxF1,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "YOUDEN_J" | "YOUDEN" | "J" => Ok(Objective::YoudenJ),
            "MAX_F1" | "F1" => Ok(Objective::MaxF1),
            other => Err(format!("unknown objective {other:?}")),
        }
    }
}

/// Exact objective value `num / den`, compared by cross-multiplication so
/// equal values always tie.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: i128,
    den: i128,
}

impl Score {
    fn beats(self, other: Score) -> bool {
        self.num * other.den > other.num * self.den
    }
}

fn objective_at(objective: Objective, tp: u64, fp: u64, pos: u64, neg: u64) -> Score {
    let (tp, fp, pos, neg) = (tp as i128, fp as i128, pos as i128, neg as i128);
    match objective {
        Objective::YoudenJ => Score { num: tp * neg - fp * pos, den: pos * neg },
        // 2tp / (2tp + fp + fn) with fn = pos - tp.
        Objective::MaxF1 => Score { num: 2 * tp, den: (tp + fp + pos).max(1) },
    }
}

/// Picks the threshold maximizing `objective` among the midpoints between
/// consecutive distinct scores and the two sentinels `min - 1`, `max + 1`.
/// Ties go to the smallest candidate.
pub fn optimal_cutoff(scores: &[f64], truth: &[BinaryLabel], objective: Objective) -> Result<f64> {
    check_lengths(scores.len(), truth.len())?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonfiniteValue);
    }
    // (score, positives, negatives) per distinct score, ascending.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for &i in &order {
        let (p, n) = if truth[i].is_similar() { (1, 0) } else { (0, 1) };
        match groups.last_mut() {
            Some(g) if g.0 == scores[i] => {
                g.1 += p;
                g.2 += n;
            }
            _ => groups.push((scores[i], p, n)),
        }
    }
    let pos: u64 = groups.iter().map(|g| g.1).sum();
    let neg: u64 = groups.iter().map(|g| g.2).sum();
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }

    // Candidate j predicts SIMILAR for groups j.. (all of them for the low
    // sentinel, none for the high one).
    let mut best: Option<(Score, f64)> = None;
    let (mut tp, mut fp) = (pos, neg);
    for j in 0..=groups.len() {
        let candidate = match j {
            0 => groups[0].0 - 1.0,
            j if j == groups.len() => groups[j - 1].0 + 1.0,
            j => midpoint(groups[j - 1].0, groups[j].0),
        };
        if j > 0 {
            tp -= groups[j - 1].1;
            fp -= groups[j - 1].2;
        }
        let value = objective_at(objective, tp, fp, pos, neg);
        if best.is_none_or(|(b, _)| value.beats(b)) {
            best = Some((value, candidate));
        }
    }
    Ok(best.expect("at least two candidates").1)
}

/// A value in `(a, b]` that splits `a` from `b` under `score >= t`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m <= a {
        b
    } else {
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

/// Per-domain cutoffs with a global fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProfile {
    pub objective: Objective,
    pub global: f64,
    #[serde(default)]
    pub per_domain: BTreeMap<Domain, f64>,
    pub provenance: Provenance,
}

impl ThresholdProfile {
    /// A single global cutoff.
    pub fn fixed(global: f64) -> Self {
        ThresholdProfile {
            objective: Objective::default(),
            global,
            per_domain: BTreeMap::new(),
            provenance: Provenance { dataset_id: "manual".into(), created_unix: None },
        }
    }

    pub fn with_domain(mut self, domain: Domain, cutoff: f64) -> Self {
        self.per_domain.insert(domain, cutoff);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for &c in std::iter::once(&self.global).chain(self.per_domain.values()) {
            if !(-1.0..=1.0).contains(&c) {
                return Err(Error::InvalidCutoff(c));
            }
        }
        Ok(())
    }

    pub fn cutoff_for(&self, domain: Domain) -> f64 {
        self.per_domain.get(&domain).copied().unwrap_or(self.global)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: ThresholdProfile = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ThresholdProfile::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Profiles under both objectives, plus warnings for domains that fell back
/// to the global cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub selected: Objective,
    pub youden_j: ThresholdProfile,
    pub max_f1: ThresholdProfile,
    pub warnings: Vec<String>,
}

impl Calibration {
    pub fn profile(&self) -> &ThresholdProfile {
        match self.selected {
            Objective::YoudenJ => &self.youden_j,
            Objective::MaxF1 => &self.max_f1,
        }
    }

    pub fn into_profile(self) -> ThresholdProfile {
        match self.selected {
            Objective::YoudenJ => self.youden_j,
            Objective::MaxF1 => self.max_f1,
        }
    }
}

/// In-sample calibration: one cutoff per domain present in `samples` and a
/// pooled global cutoff.  Cutoffs are clamped into `[-1, 1]`.
pub fn calibrate_profiles(
    samples: &[(Domain, f64, BinaryLabel)],
    objective: Objective,
    dataset_id: &str,
) -> Result<Calibration> {
    let scores: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let truth: Vec<BinaryLabel> = samples.iter().map(|s| s.2).collect();
    let mut by_domain: BTreeMap<Domain, (Vec<f64>, Vec<BinaryLabel>)> = BTreeMap::new();
    for &(d, s, t) in samples {
        let e = by_domain.entry(d).or_default();
        e.0.push(s);
        e.1.push(t);
    }
    let mut warnings = Vec::new();
    let mut build = |obj: Objective, warn: bool| -> Result<ThresholdProfile> {
        let global = optimal_cutoff(&scores, &truth, obj)?.clamp(-1.0, 1.0);
        let mut per_domain = BTreeMap::new();
        for (&d, (s, t)) in &by_domain {
            let cutoff = match optimal_cutoff(s, t, obj) {
                Ok(c) => c.clamp(-1.0, 1.0),
                Err(Error::SingleClass) => {
                    if warn {
                        warnings.push(format!("domain {} has a single class; using the global cutoff", d.code()));
                    }
                    global
                }
                Err(e) => return Err(e),
            };
            per_domain.insert(d, cutoff);
        }
        Ok(ThresholdProfile {
            objective: obj,
            global,
            per_domain,
            provenance: Provenance { dataset_id: dataset_id.to_string(), created_unix: None },
        })
    };
    let youden_j = build(Objective::YoudenJ, true)?;
    let max_f1 = build(Objective::MaxF1, false)?;
    Ok(Calibration { selected: objective, youden_j, max_f1, warnings })
}
