use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Unweighted Cohen's kappa with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa {
    pub kappa: f64,
    pub observed: f64,
    pub expected: f64,
    /// Both annotators used one identical category, so chance agreement is 1
    /// and kappa is defined as 1.0.
    pub degenerate: bool,
}

/// κ = (p_o − p_e) / (1 − p_e), chance agreement from the product of the two
/// annotators' marginals.
pub fn cohen_kappa<T: Ord>(labels1: &[T], labels2: &[T]) -> Result<Kappa> {
    if labels1.len() != labels2.len() {
        return Err(Error::LengthMismatch { left: labels1.len(), right: labels2.len() });
    }
    if labels1.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = labels1.len() as f64;
    let mut marginals: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    let mut agree = 0usize;
    for (a, b) in labels1.iter().zip(labels2) {
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
        if a == b {
            agree += 1;
        }
    }
    let observed = agree as f64 / n;
    // Integer numerator keeps p_e symmetric and exact up to the final division.
    let expected_num: u128 = marginals.values().map(|&(x, y)| x as u128 * y as u128).sum();
    let n2 = labels1.len() as u128 * labels1.len() as u128;
    let expected = expected_num as f64 / (n * n);
    if expected_num == n2 {
        return Ok(Kappa { kappa: 1.0, observed, expected: 1.0, degenerate: true });
    }
    let kappa = (observed - expected) / (1.0 - expected);
    Ok(Kappa { kappa, observed, expected, degenerate: false })
}

/// Arithmetic mean of per-stratum kappas.
pub fn mean_kappa(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
