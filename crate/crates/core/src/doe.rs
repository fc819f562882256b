//! Design of experiments: Latin hypercube designs, uniform test sets and
//! domain scaling.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::check_dim;
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Axis-aligned box in problem units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DomainBox {
    intervals: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Config("domain box needs at least one axis".into()));
        }
        for (k, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("domain axis {} must satisfy low < high, got [{lo}, {hi}]", k + 1)));
            }
        }
        Ok(Self { intervals })
    }

    /// The unit hypercube `[0, 1]^s`.
    pub fn unit(s: usize) -> Self {
        Self {
            intervals: vec![(0.0, 1.0); s.max(1)],
        }
    }

    /// Same interval on every axis.
    pub fn cube(s: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(vec![(low, high); s])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Whether `x` lies inside the box, allowing `tol` slack per coordinate.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.intervals)
                .all(|(&v, &(lo, hi))| v >= lo - tol && v <= hi + tol)
    }
}

impl TryFrom<Vec<(f64, f64)>> for DomainBox {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DomainBox> for Vec<(f64, f64)> {
    fn from(b: DomainBox) -> Self {
        b.intervals
    }
}

/// Latin hypercube design of `n` points in `[0, 1]^s`.
///
/// Column `k` is drawn as a uniform random permutation of the strata
/// `0..n` followed by `n` uniform jitters, so every stratum `[j/n, (j+1)/n)`
/// holds exactly one sample per column. Columns are drawn in order from a
/// single ChaCha8 stream seeded with `seed`.
pub fn lhs(n: usize, s: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    let mut out = DMatrix::zeros(n, s);
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..s {
        strata.shuffle(&mut rng);
        for (i, &stratum) in strata.iter().enumerate() {
            let r: f64 = rng.random();
            let upper = ((stratum + 1) as f64 / nf).next_down();
            out[(i, k)] = ((stratum as f64 + r) / nf).min(upper);
        }
    }
    out
}

/// `n` points drawn uniformly in `[0, 1]^s`, row by row.
pub fn uniform_unit(n: usize, s: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, s);
    for i in 0..n {
        for k in 0..s {
            out[(i, k)] = rng.random::<f64>();
        }
    }
    out
}

/// Maps unit-cube points into `domain` with `low·(1-u) + high·u` per axis,
/// which lands exactly on the corners for `u ∈ {0, 1}`.
pub fn scale(points: &DMatrix<f64>, domain: &DomainBox) -> Result<DMatrix<f64>> {
    check_dim(domain.dim(), points.ncols())?;
    if let Some(bad) = points.iter().find(|u| !(0.0..=1.0).contains(*u)) {
        return Err(Error::Range(format!("unit-cube coordinate {bad} is outside [0, 1]")));
    }
    let mut out = points.clone();
    for (k, &(lo, hi)) in domain.intervals().iter().enumerate() {
        out.column_mut(k).apply(|u| *u = lo * (1.0 - *u) + hi * *u);
    }
    Ok(out)
}

/// Inverse of [`scale`].
pub fn unscale(points: &DMatrix<f64>, domain: &DomainBox) -> Result<DMatrix<f64>> {
    check_dim(domain.dim(), points.ncols())?;
    Ok(crate::transform::to_unit(points, domain))
}

/// Independent (non-nested) HF and LF Latin hypercube designs scaled into
/// `domain`. Returns `(hf, lf)`.
pub fn make_mf_doe(domain: &DomainBox, hf_n: usize, lf_n: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let s = domain.dim();
    let hf = lhs(hf_n, s, derive_seed(seed, &[1]));
    let lf = lhs(lf_n, s, derive_seed(seed, &[2]));
    // LHS output is always inside [0, 1).
    (
        scale(&hf, domain).expect("lhs output lies in the unit cube"),
        scale(&lf, domain).expect("lhs output lies in the unit cube"),
    )
}

/// Redraw attempts per rejected point before giving up.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 10_000;

/// Jitter redraws inside a stratum cell before trading strata with another row.
pub const CELL_ATTEMPTS: usize = 64;

/// A design in problem units and the number of points that were redrawn.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedDesign {
    pub points: DMatrix<f64>,
    pub resampled: usize,
}

fn row_of(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Latin hypercube design in `domain` where every point passes `accept`.
///
/// A rejected point first gets fresh jitters inside its strata, drawn from
/// a second ChaCha8 stream seeded from `seed`. If its cell has no valid
/// point after [`CELL_ATTEMPTS`] draws, it trades its stratum in one random
/// column with another random row and both rows are checked again. Both
/// moves keep the design a Latin hypercube. Fails with a data error after
/// `n ·` [`MAX_RESAMPLE_ATTEMPTS`] redraws.
pub fn lhs_checked(
    n: usize,
    domain: &DomainBox,
    seed: u64,
    mut accept: impl FnMut(&[f64]) -> bool,
) -> Result<CheckedDesign> {
    let s = domain.dim();
    let mut unit = lhs(n, s, seed);
    let mut points = scale(&unit, domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[RESAMPLE_STREAM]));
    let nf = n as f64;
    let redraw = |unit: &mut DMatrix<f64>, points: &mut DMatrix<f64>, rng: &mut ChaCha8Rng, i: usize, k: usize| {
        let j = stratum_of(unit[(i, k)], n);
        let upper = ((j + 1) as f64 / nf).next_down();
        let u = ((j as f64 + rng.random::<f64>()) / nf).min(upper);
        let (lo, hi) = domain.intervals()[k];
        unit[(i, k)] = u;
        points[(i, k)] = lo * (1.0 - u) + hi * u;
    };

    let mut pending: std::collections::VecDeque<usize> =
        (0..n).filter(|&i| !accept(&row_of(&points, i))).collect();
    let budget = n.saturating_mul(MAX_RESAMPLE_ATTEMPTS);
    let mut resampled = 0;
    while let Some(i) = pending.pop_front() {
        let mut ok = false;
        for _ in 0..CELL_ATTEMPTS {
            if resampled == budget {
                return Err(rejection_error(&row_of(&points, i)));
            }
            resampled += 1;
            for k in 0..s {
                redraw(&mut unit, &mut points, &mut rng, i, k);
            }
            if accept(&row_of(&points, i)) {
                ok = true;
                break;
            }
        }
        if ok {
            continue;
        }
        if n == 1 {
            return Err(rejection_error(&row_of(&points, i)));
        }
        let k = rng.random_range(0..s);
        let other = (i + rng.random_range(1..n)) % n;
        let (ui, uo) = (unit[(i, k)], unit[(other, k)]);
        unit[(i, k)] = uo;
        unit[(other, k)] = ui;
        redraw(&mut unit, &mut points, &mut rng, i, k);
        redraw(&mut unit, &mut points, &mut rng, other, k);
        pending.push_back(i);
        if !pending.contains(&other) && !accept(&row_of(&points, other)) {
            pending.push_back(other);
        }
    }
    Ok(CheckedDesign { points, resampled })
}

/// Uniform points in `domain` where every point passes `accept`; rejected
/// points are redrawn from the same stream.
pub fn uniform_checked(
    n: usize,
    domain: &DomainBox,
    seed: u64,
    mut accept: impl FnMut(&[f64]) -> bool,
) -> Result<CheckedDesign> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = DMatrix::zeros(n, domain.dim());
    let mut resampled = 0;
    for i in 0..n {
        let mut attempts = 0;
        loop {
            for (k, &(lo, hi)) in domain.intervals().iter().enumerate() {
                let u: f64 = rng.random();
                points[(i, k)] = lo * (1.0 - u) + hi * u;
            }
            if accept(&row_of(&points, i)) {
                break;
            }
            if attempts == MAX_RESAMPLE_ATTEMPTS {
                return Err(rejection_error(&row_of(&points, i)));
            }
            attempts += 1;
            resampled += 1;
        }
    }
    Ok(CheckedDesign { points, resampled })
}

const RESAMPLE_STREAM: u64 = 0x5245_4a45_4354;

fn rejection_error(x: &[f64]) -> Error {
    Error::Data(format!(
        "no valid point found after {MAX_RESAMPLE_ATTEMPTS} redraws (last candidate {x:?})"
    ))
}

/// Uniform random test points in `domain`.
pub fn uniform_points(n: usize, domain: &DomainBox, seed: u64) -> DMatrix<f64> {
    let u = uniform_unit(n, domain.dim(), seed);
    scale(&u, domain).expect("uniform draws lie in the unit cube")
}

/// Stratum index `j` with `j/n <= u < (j+1)/n`, for a unit-cube coordinate.
pub fn stratum_of(u: f64, n: usize) -> usize {
    let nf = n as f64;
    let mut j = ((u * nf).floor() as usize).min(n - 1);
    while j > 0 && u < j as f64 / nf {
        j -= 1;
    }
    while j + 1 < n && u >= (j + 1) as f64 / nf {
        j += 1;
    }
    j
}
