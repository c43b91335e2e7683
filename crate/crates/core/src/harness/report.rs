use std::path::{Path, PathBuf};

use super::MetricsReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// `.csv` means CSV; anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

/// Sibling file holding curve points, `<stem>_curves.csv`.
pub fn curves_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_curves.csv"))
}

/// JSON is the full report.  CSV writes one line per stratum and puts the
/// curve points in [`curves_path`].
pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => std::fs::write(path, report.to_json()?).map_err(|e| Error::io(path, e)),
        ReportFormat::Csv => {
            write_rows(report, path)?;
            write_curves(report, &curves_path(path))
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_rows(report: &MetricsReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pairing", "domain", "provider", "n", "accuracy", "precision", "recall", "f1", "roc_auc", "pr_auc", "cutoff"])?;
    for r in &report.rows {
        w.write_record([
            r.pairing.clone(),
            r.domain.clone(),
            r.provider.clone(),
            r.n.to_string(),
            r.accuracy.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.f1.to_string(),
            opt(r.roc_auc),
            opt(r.pr_auc),
            r.cutoff.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_curves(report: &MetricsReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pairing", "domain", "kind", "threshold", "x", "y"])?;
    for c in &report.curves {
        for (kind, curve) in [("ROC", &c.roc), ("PR", &c.pr)] {
            let Some(curve) = curve else { continue };
            for (&(x, y), &t) in curve.points.iter().zip(&curve.thresholds) {
                w.write_record([c.pairing.as_str(), c.domain.as_str(), kind, &t.to_string(), &x.to_string(), &y.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
