use serde::{Deserialize, Serialize};

use super::check_lengths;
use crate::error::{Error, Result};
use crate::model::BinaryLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CurveKind {
    Roc,
    Pr,
}

/// Curve vertices with the threshold that produces each one.  ROC points are
/// `(fpr, tpr)`, PR points `(recall, precision)`.  A point's threshold means
/// "predict SIMILAR when score >= threshold"; the first point uses
/// `max score + 1`, which predicts nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoints {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucResult {
    pub auc: f64,
    pub curve: CurvePoints,
}

/// `(score, cumulative tp, cumulative fp)` per distinct score.
type Groups = Vec<(f64, u64, u64)>;

/// Cumulative (tp, fp) after each distinct score, highest first.
fn sweep(scores: &[f64], truth: &[BinaryLabel]) -> Result<(Groups, u64, u64)> {
    check_lengths(scores.len(), truth.len())?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonfiniteValue);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut steps: Vec<(f64, u64, u64)> = Vec::new();
    for &i in &order {
        if truth[i].is_similar() {
            tp += 1;
        } else {
            fp += 1;
        }
        match steps.last_mut() {
            Some(last) if last.0 == scores[i] => {
                last.1 = tp;
                last.2 = fp;
            }
            _ => steps.push((scores[i], tp, fp)),
        }
    }
    Ok((steps, tp, fp))
}

/// Empirical ROC with tied scores grouped into one step; AUC by trapezoid,
/// which equals the Mann-Whitney statistic.
pub fn roc_auc(scores: &[f64], truth: &[BinaryLabel]) -> Result<AucResult> {
    let (steps, pos, neg) = sweep(scores, truth)?;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![steps[0].0 + 1.0];
    let mut auc = 0.0;
    for &(s, tp, fp) in &steps {
        let (x0, y0) = *points.last().unwrap();
        let (x, y) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x - x0) * (y + y0) / 2.0;
        points.push((x, y));
        thresholds.push(s);
    }
    Ok(AucResult { auc, curve: CurvePoints { kind: CurveKind::Roc, points, thresholds } })
}

/// Average precision: `sum (R_i - R_{i-1}) * P_i` over distinct-score steps.
/// The curve starts at `(0, 1)`.
pub fn pr_auc(scores: &[f64], truth: &[BinaryLabel]) -> Result<AucResult> {
    let (steps, pos, _) = sweep(scores, truth)?;
    if pos == 0 {
        return Err(Error::NoPositives);
    }
    let mut points = vec![(0.0, 1.0)];
    let mut thresholds = vec![steps[0].0 + 1.0];
    let (mut ap, mut prev_recall) = (0.0, 0.0);
    for &(s, tp, fp) in &steps {
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / pos as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push((recall, precision));
        thresholds.push(s);
    }
    Ok(AucResult { auc: ap, curve: CurvePoints { kind: CurveKind::Pr, points, thresholds } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use BinaryLabel::{Dissimilar as D, Similar as S};

    #[test]
    fn roc_hand_cases() {
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &[S, S, D, D]).unwrap().auc, 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &[S, D, S, D]).unwrap().auc, 0.5);
        let r = roc_auc(&[0.9, 0.4, 0.6, 0.1], &[S, S, D, D]).unwrap();
        assert!((r.auc - 0.75).abs() < 1e-12);
        assert_eq!(r.curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.curve.points.last(), Some(&(1.0, 1.0)));
        assert!(matches!(roc_auc(&[0.1, 0.2], &[S, S]), Err(Error::SingleClass)));
    }

    #[test]
    fn pr_hand_cases() {
        assert_eq!(pr_auc(&[0.9, 0.8, 0.2], &[S, S, D]).unwrap().auc, 1.0);
        let r = pr_auc(&[0.9, 0.8, 0.7, 0.6], &[S, D, S, D]).unwrap();
        assert!((r.auc - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert!(matches!(pr_auc(&[0.1], &[D]), Err(Error::NoPositives)));
    }

    #[test]
    fn twenty_distinct_scores_give_21_roc_points() {
        let scores: Vec<f64> = (0..40).map(|i| (i % 20) as f64 / 20.0).collect();
        let truth: Vec<_> = (0..40).map(|i| if i % 3 == 0 { S } else { D }).collect();
        assert_eq!(roc_auc(&scores, &truth).unwrap().curve.points.len(), 21);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<BinaryLabel>)> {
        proptest::collection::vec((0u8..10, any::<bool>()), 2..40).prop_map(|v| {
            let scores = v.iter().map(|(s, _)| *s as f64 / 10.0).collect();
            let truth = v.iter().map(|(_, t)| if *t { S } else { D }).collect();
            (scores, truth)
        })
    }

    proptest! {
        #[test]
        fn roc_is_monotone((scores, truth) in instance()) {
            prop_assume!(truth.contains(&S) && truth.contains(&D));
            let c = roc_auc(&scores, &truth).unwrap().curve;
            for w in c.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
            prop_assert_eq!(*c.points.last().unwrap(), (1.0, 1.0));
        }

        #[test]
        fn label_flip_duality((scores, truth) in instance()) {
            prop_assume!(truth.contains(&S) && truth.contains(&D));
            let a = roc_auc(&scores, &truth).unwrap().auc;
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let flipped: Vec<_> = truth.iter().map(|t| t.flip()).collect();
            prop_assert!((roc_auc(&neg, &flipped).unwrap().auc - a).abs() < 1e-12);
        }

        #[test]
        fn pr_recall_nondecreasing((scores, truth) in instance()) {
            prop_assume!(truth.contains(&S));
            let c = pr_auc(&scores, &truth).unwrap().curve;
            for w in c.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0);
            }
        }
    }
}
