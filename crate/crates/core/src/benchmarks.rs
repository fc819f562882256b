//! Analytic high/low-fidelity test pairs with a correlation knob `m ∈ [0, 1]`.
//!
//! | name    | s | default preset         | other presets       |
//! |---------|---|------------------------|---------------------|
//! | `currin`| 2 | `unit`: `[0, 1]²`      | `half`: `[0, 0.5]²` |
//! | `park1` | 4 | `negative`: `[-1, 0]⁴` | `unit`: `[0, 1]⁴`   |
//! | `park2` | 4 | `unit`: `[0, 1]⁴`      |                     |
//!
//! Evaluators return [`Error::DomainEvaluation`] at singular points instead
//! of producing non-finite values.

use nalgebra::{DMatrix, DVector};

use crate::doe::DomainBox;
use crate::error::check_dim;
use crate::{Error, Result};

type HfFn = fn(&[f64]) -> Result<f64>;
type LfFn = fn(&[f64], f64) -> Result<f64>;

/// A registered HF/LF pair.
#[derive(Debug)]
pub struct BenchmarkFamily {
    pub name: &'static str,
    pub dimension: usize,
    /// `(preset name, low, high)` cubes; the first entry is the default.
    presets: &'static [(&'static str, f64, f64)],
    hf: HfFn,
    lf: LfFn,
}

static FAMILIES: [BenchmarkFamily; 3] = [
    BenchmarkFamily {
        name: "currin",
        dimension: 2,
        presets: &[("unit", 0.0, 1.0), ("half", 0.0, 0.5)],
        hf: currin_hf,
        lf: currin_lf,
    },
    BenchmarkFamily {
        name: "park1",
        dimension: 4,
        presets: &[("negative", -1.0, 0.0), ("unit", 0.0, 1.0)],
        hf: park1_hf,
        lf: park1_lf,
    },
    BenchmarkFamily {
        name: "park2",
        dimension: 4,
        presets: &[("unit", 0.0, 1.0)],
        hf: park2_hf,
        lf: park2_lf,
    },
];

/// Looks up a family by name (`currin`, `park1`, `park2`).
pub fn family(name: &str) -> Option<&'static BenchmarkFamily> {
    FAMILIES.iter().find(|f| f.name == name)
}

pub fn families() -> &'static [BenchmarkFamily] {
    &FAMILIES
}

impl BenchmarkFamily {
    /// Default domain (first preset).
    pub fn domain(&self) -> DomainBox {
        let (_, lo, hi) = self.presets[0];
        DomainBox::cube(self.dimension, lo, hi).expect("preset domains are valid")
    }

    pub fn domain_preset(&self, preset: &str) -> Option<DomainBox> {
        self.presets
            .iter()
            .find(|(name, _, _)| *name == preset)
            .map(|&(_, lo, hi)| DomainBox::cube(self.dimension, lo, hi).expect("preset domains are valid"))
    }

    pub fn preset_names(&self) -> impl Iterator<Item = &'static str> {
        self.presets.iter().map(|p| p.0)
    }

    pub fn hf(&self, x: &[f64]) -> Result<f64> {
        (self.hf)(x)
    }

    pub fn lf(&self, x: &[f64], m: f64) -> Result<f64> {
        (self.lf)(x, m)
    }

    pub fn eval_hf_rows(&self, points: &DMatrix<f64>) -> Result<DVector<f64>> {
        let ys = (0..points.nrows())
            .map(|i| self.hf(points.row(i).iter().copied().collect::<Vec<_>>().as_slice()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(ys))
    }

    pub fn eval_lf_rows(&self, points: &DMatrix<f64>, m: f64) -> Result<DVector<f64>> {
        let ys = (0..points.nrows())
            .map(|i| self.lf(points.row(i).iter().copied().collect::<Vec<_>>().as_slice(), m))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(ys))
    }
}

fn check_m(m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::Range(format!("correlation knob m = {m} is outside [0, 1]")))
    }
}

fn finite(family: &'static str, x: &[f64], v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DomainEvaluation {
            family,
            point: x.to_vec(),
            reason: "non-finite value",
        })
    }
}

/// Currin HF term. At `x2 = 0` the factor `1 - exp(-1/(2 x2))` takes its
/// right limit 1, which IEEE arithmetic produces on its own.
fn currin_raw(x1: f64, x2: f64) -> f64 {
    let num = ((2000.0 * x1 + 1900.0) * x1 + 2092.0) * x1 + 60.0;
    let den = ((100.0 * x1 + 500.0) * x1 + 4.0) * x1 + 20.0;
    (1.0 - (-1.0 / (2.0 * x2)).exp()) * num / den
}

/// Currin HF function:
/// `(1 - exp(-1/(2x₂))) · (2000x₁³ + 1900x₁² + 2092x₁ + 60) / (100x₁³ + 500x₁² + 4x₁ + 20)`.
pub fn currin_hf(x: &[f64]) -> Result<f64> {
    check_dim(2, x.len())?;
    if x[1] == 0.0 {
        return Err(Error::DomainEvaluation {
            family: "currin",
            point: x.to_vec(),
            reason: "x2 = 0",
        });
    }
    finite("currin", x, currin_raw(x[0], x[1]))
}

/// Currin LF function: the `(1 - m² - 2m)`-weighted HF value at the
/// `(+0.05, +0.05)` shift plus a quarter of the other three shifted values.
///
/// The `max(0, x₂ - 0.05)` clamps put shifted points on `x₂ = 0`, where the
/// HF term is evaluated by its continuous extension.
pub fn currin_lf(x: &[f64], m: f64) -> Result<f64> {
    check_dim(2, x.len())?;
    check_m(m)?;
    let (x1, x2) = (x[0], x[1]);
    let down = (x2 - 0.05).max(0.0);
    let lead = 1.0 - m * m - 2.0 * m;
    let v = lead * currin_raw(x1 + 0.05, x2 + 0.05)
        + 0.25 * (currin_raw(x1 + 0.05, down) + currin_raw(x1 - 0.05, x2 + 0.05) + currin_raw(x1 - 0.05, down));
    finite("currin", x, v)
}

/// Park function 1 (HF):
/// `x₁/2 · [sqrt(1 + (x₂ + x₃²) x₄ / x₁²) - 1] + (x₁ + 3x₄) · exp(1 + sin x₃)`.
pub fn park1_hf(x: &[f64]) -> Result<f64> {
    check_dim(4, x.len())?;
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    if x1 == 0.0 {
        return Err(Error::DomainEvaluation {
            family: "park1",
            point: x.to_vec(),
            reason: "x1 = 0",
        });
    }
    let arg = 1.0 + (x2 + x3 * x3) * x4 / (x1 * x1);
    if arg < 0.0 {
        return Err(Error::DomainEvaluation {
            family: "park1",
            point: x.to_vec(),
            reason: "negative square-root argument",
        });
    }
    let v = 0.5 * x1 * (arg.sqrt() - 1.0) + (x1 + 3.0 * x4) * (1.0 + x3.sin()).exp();
    finite("park1", x, v)
}

/// Park function 1 (LF):
/// `(1 - m² - 2m) · [1 + sin(x₁)/10] · f_H(x) - 2x₁ + x₂² + x₃² + 0.5`.
pub fn park1_lf(x: &[f64], m: f64) -> Result<f64> {
    check_m(m)?;
    let hf = park1_hf(x)?;
    let lead = 1.0 - m * m - 2.0 * m;
    let v = lead * (1.0 + x[0].sin() / 10.0) * hf - 2.0 * x[0] + x[1] * x[1] + x[2] * x[2] + 0.5;
    finite("park1", x, v)
}

/// Park function 2 (HF): `(2/3) exp(x₁ + x₂) - x₄ sin x₃ + x₃`.
pub fn park2_hf(x: &[f64]) -> Result<f64> {
    check_dim(4, x.len())?;
    let v = 2.0 / 3.0 * (x[0] + x[1]).exp() - x[3] * x[2].sin() + x[2];
    finite("park2", x, v)
}

/// Park function 2 (LF): `1.2 f_H(x) - (0.5m² + m + 0.5) · (2/3) exp(x₁ + x₂)`.
pub fn park2_lf(x: &[f64], m: f64) -> Result<f64> {
    check_m(m)?;
    let hf = park2_hf(x)?;
    let v = 1.2 * hf - (0.5 * m * m + m + 0.5) * (2.0 / 3.0) * (x[0] + x[1]).exp();
    finite("park2", x, v)
}
