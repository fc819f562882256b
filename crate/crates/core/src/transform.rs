//! Affine maps between problem units and the unit hypercube / standardized responses.

use nalgebra::{DMatrix, DVector};

use crate::doe::DomainBox;

/// Maps every row of `points` from `domain` into `[0, 1]^s`.
pub(crate) fn to_unit(points: &DMatrix<f64>, domain: &DomainBox) -> DMatrix<f64> {
    let mut out = points.clone();
    for (k, &(lo, hi)) in domain.intervals().iter().enumerate() {
        let width = hi - lo;
        out.column_mut(k).apply(|v| *v = (*v - lo) / width);
    }
    out
}

pub(crate) fn point_to_unit(x: &[f64], domain: &DomainBox) -> Vec<f64> {
    x.iter()
        .zip(domain.intervals())
        .map(|(&v, &(lo, hi))| (v - lo) / (hi - lo))
        .collect()
}

/// Mean and standard deviation (population) used to standardize responses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ResponseScaling {
    pub mean: f64,
    pub std: f64,
}

impl ResponseScaling {
    pub fn fit(y: &DVector<f64>) -> Self {
        let n = y.len() as f64;
        let mean = y.sum() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        // Constant responses: leave the scale alone, the bias absorbs everything.
        let std = if std > f64::EPSILON * mean.abs().max(1.0) { std } else { 1.0 };
        Self { mean, std }
    }

    pub fn standardize(&self, y: &DVector<f64>) -> DVector<f64> {
        y.map(|v| (v - self.mean) / self.std)
    }
}
