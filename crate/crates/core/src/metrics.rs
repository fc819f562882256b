//! Accuracy and correlation statistics.

use serde::{Deserialize, Serialize};

use crate::error::check_dim;
use crate::{Error, Result};

/// One-sided 95% Student t critical value at 58 degrees of freedom (two
/// samples of 30 repeats), used as the decision threshold for [`welch_t`].
pub const T_CRITICAL_95_DF58: f64 = 1.65;
pub const T_CRITICAL_DOF: usize = 58;

/// Coefficient of determination `1 - Σ(y - ŷ)² / Σ(y - ȳ)²`.
pub fn r_squared(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_dim(truth.len(), pred.len())?;
    if truth.len() < 2 {
        return Err(Error::DegenerateMetric("R² needs at least two samples"));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let total: f64 = truth.iter().map(|y| (y - mean).powi(2)).sum();
    if total == 0.0 {
        return Err(Error::DegenerateMetric("R² of a constant response"));
    }
    let residual: f64 = truth.iter().zip(pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(1.0 - residual / total)
}

/// Squared sample Pearson correlation between HF and LF responses.
pub fn pearson_r2(y_h: &[f64], y_l: &[f64]) -> Result<f64> {
    check_dim(y_h.len(), y_l.len())?;
    if y_h.len() < 2 {
        return Err(Error::DegenerateMetric("Pearson correlation needs at least two samples"));
    }
    let n = y_h.len() as f64;
    let mh = y_h.iter().sum::<f64>() / n;
    let ml = y_l.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (h, l) in y_h.iter().zip(y_l) {
        let (dh, dl) = (h - mh, l - ml);
        sxy += dh * dl;
        sxx += dh * dh;
        syy += dl * dl;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateMetric("Pearson correlation of a constant vector"));
    }
    let r2 = sxy * sxy / (sxx * syy);
    Ok(r2.min(1.0))
}

/// R² statistics over repeated designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub mean_r2: f64,
    pub std_r2: f64,
    pub n_repeats: usize,
    pub per_repeat: Vec<f64>,
}

/// Sample mean and (n-1) standard deviation; a single value has std 0.
pub fn summarize(per_repeat: &[f64]) -> Result<AccuracySummary> {
    if per_repeat.is_empty() {
        return Err(Error::DegenerateMetric("cannot summarize an empty list"));
    }
    let n = per_repeat.len();
    let mean = per_repeat.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (per_repeat.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(AccuracySummary {
        mean_r2: mean,
        std_r2: std,
        n_repeats: n,
        per_repeat: per_repeat.to_vec(),
    })
}

/// Two-sample t statistic with unpooled variances,
/// `(mean_a - mean_b) / sqrt(std_a²/n_a + std_b²/n_b)`.
///
/// Compare against [`T_CRITICAL_95_DF58`] for the 30-vs-30 protocol.
pub fn welch_t(a: &AccuracySummary, b: &AccuracySummary) -> Result<f64> {
    if a.n_repeats < 2 || b.n_repeats < 2 {
        return Err(Error::DegenerateMetric("t statistic needs at least two repeats per side"));
    }
    let var = a.std_r2.powi(2) / a.n_repeats as f64 + b.std_r2.powi(2) / b.n_repeats as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateMetric("t statistic with zero combined variance"));
    }
    Ok((a.mean_r2 - b.mean_r2) / var.sqrt())
}
