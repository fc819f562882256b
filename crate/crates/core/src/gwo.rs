//! Grey wolf optimizer over a box.
//!
//! Each iteration `t` of `T`:
//!
//! 1. `a = 2 (1 - t/T)`.
//! 2. For every wolf `X` (in index order) and every leader `L ∈ {1st, 2nd, 3rd}`
//!    draw `A = 2a·r₁ - a`, `C = 2r₂` and form
//!    `D = |C ⊙ L - X|`, `X_L = L - A ⊙ D`.
//! 3. The new position is `(X_1st + X_2nd + X_3rd) / 3`, clamped to the box.
//! 4. All wolves are evaluated; the three best positions seen so far become
//!    the leaders of the next iteration.
//!
//! Random numbers come from one ChaCha8 stream seeded with `seed`:
//! initial positions wolf by wolf, coordinate by coordinate; then per
//! iteration, per wolf, per leader, the `d` components of `r₁` followed by
//! the `d` components of `r₂`. Objective calls never touch the stream, so
//! evaluating wolves in parallel does not change results.
//!
//! Coordinates flagged in `log_scale` are searched over `log10` of their
//! bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, PENALTY};

/// Population size, iteration count and seed; the box comes from the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GwoOptions {
    pub population: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for GwoOptions {
    fn default() -> Self {
        Self {
            population: 30,
            iterations: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwoConfig {
    pub population: usize,
    pub iterations: usize,
    pub seed: u64,
    /// `(low, high)` per coordinate in problem units; `low == high` pins it.
    pub bounds: Vec<(f64, f64)>,
    pub log_scale: Vec<bool>,
}

impl GwoConfig {
    pub fn new(options: GwoOptions, bounds: Vec<(f64, f64)>, log_scale: Vec<bool>) -> Self {
        Self {
            population: options.population,
            iterations: options.iterations,
            seed: options.seed,
            bounds,
            log_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::Config(format!("GWO population must be at least 4, got {}", self.population)));
        }
        if self.iterations == 0 {
            return Err(Error::Config("GWO needs at least one iteration".into()));
        }
        if self.bounds.is_empty() {
            return Err(Error::Config("GWO search box is empty".into()));
        }
        if self.log_scale.len() != self.bounds.len() {
            return Err(Error::Config(format!(
                "log-scale mask has {} entries for {} coordinates",
                self.log_scale.len(),
                self.bounds.len()
            )));
        }
        for (k, (&(lo, hi), &log)) in self.bounds.iter().zip(&self.log_scale).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("GWO bound {k} is inverted or non-finite: [{lo}, {hi}]")));
            }
            if log && lo <= 0.0 {
                return Err(Error::Config(format!("log-scaled GWO bound {k} must be positive, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwoResult {
    pub best_position: Vec<f64>,
    pub best_score: f64,
    /// Best score after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Search coordinates (log-transformed where masked) and the map back.
struct SearchSpace<'a> {
    cfg: &'a GwoConfig,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> SearchSpace<'a> {
    fn new(cfg: &'a GwoConfig) -> Self {
        let t = |v: f64, log: bool| if log { v.log10() } else { v };
        let lower = cfg.bounds.iter().zip(&cfg.log_scale).map(|(b, &l)| t(b.0, l)).collect();
        let upper = cfg.bounds.iter().zip(&cfg.log_scale).map(|(b, &l)| t(b.1, l)).collect();
        Self { cfg, lower, upper }
    }

    fn to_problem(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.cfg.bounds)
            .zip(&self.cfg.log_scale)
            .map(|((&v, &(lo, hi)), &log)| {
                if lo == hi {
                    lo
                } else if log {
                    10f64.powf(v).clamp(lo, hi)
                } else {
                    v
                }
            })
            .collect()
    }
}

/// Coefficient vectors for one leader-guided move.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub big_a: Vec<f64>,
    pub c: Vec<f64>,
}

/// `a = 2(1 - t/total)`, `A = 2a·r₁ - a`, `C = 2r₂`; draws `r₁` (d values)
/// then `r₂` (d values) from `rng`.
pub fn coefficient_schedule<R: Rng + ?Sized>(t: usize, total: usize, dim: usize, rng: &mut R) -> Coefficients {
    let a = 2.0 * (1.0 - t as f64 / total as f64);
    let big_a = (0..dim).map(|_| 2.0 * a * rng.random::<f64>() - a).collect();
    let c = (0..dim).map(|_| 2.0 * rng.random::<f64>()).collect();
    Coefficients { a, big_a, c }
}

/// Moves one wolf towards the three leaders and clamps to `[lower, upper]`.
pub fn hunt_step<R: Rng + ?Sized>(
    position: &[f64],
    leaders: [&[f64]; 3],
    t: usize,
    total: usize,
    lower: &[f64],
    upper: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let d = position.len();
    let mut sum = vec![0.0; d];
    for leader in leaders {
        let coeff = coefficient_schedule(t, total, d, rng);
        for k in 0..d {
            let dist = (coeff.c[k] * leader[k] - position[k]).abs();
            sum[k] += leader[k] - coeff.big_a[k] * dist;
        }
    }
    sum.iter()
        .enumerate()
        .map(|(k, s)| (s / 3.0).clamp(lower[k], upper[k]))
        .collect()
}

/// Best three `(score, position)` pairs seen so far; ties keep the earlier entry.
struct Leaders {
    ranked: Vec<(f64, Vec<f64>)>,
}

impl Leaders {
    fn new() -> Self {
        Self { ranked: Vec::with_capacity(4) }
    }

    fn offer(&mut self, score: f64, position: &[f64]) {
        if self.ranked.len() == 3 && score >= self.ranked[2].0 {
            return;
        }
        let at = self.ranked.iter().position(|(s, _)| score < *s).unwrap_or(self.ranked.len());
        self.ranked.insert(at, (score, position.to_vec()));
        self.ranked.truncate(3);
    }

    fn positions(&self) -> [&[f64]; 3] {
        let get = |i: usize| self.ranked[i.min(self.ranked.len() - 1)].1.as_slice();
        [get(0), get(1), get(2)]
    }

    fn best(&self) -> &(f64, Vec<f64>) {
        &self.ranked[0]
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() || v == f64::INFINITY {
        PENALTY
    } else if v == f64::NEG_INFINITY {
        f64::MIN
    } else {
        v
    }
}

/// Minimizes `objective` over the configured box.
///
/// Non-finite objective values are replaced by [`PENALTY`]. The objective
/// receives positions in problem units (log-scaled coordinates already
/// exponentiated).
pub fn minimize<F>(objective: F, cfg: &GwoConfig) -> Result<GwoResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let space = SearchSpace::new(cfg);
    let d = cfg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut wolves: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| {
            (0..d)
                .map(|k| {
                    let r: f64 = rng.random();
                    space.lower[k] + r * (space.upper[k] - space.lower[k])
                })
                .collect()
        })
        .collect();

    let evaluate = |wolves: &[Vec<f64>]| -> Vec<f64> {
        wolves
            .par_iter()
            .map(|z| sanitize(objective(&space.to_problem(z))))
            .collect()
    };

    let mut leaders = Leaders::new();
    let mut evaluations = 0;
    let scores = evaluate(&wolves);
    evaluations += scores.len();
    for (z, &s) in wolves.iter().zip(&scores) {
        leaders.offer(s, z);
    }

    let mut history = Vec::with_capacity(cfg.iterations);
    for t in 0..cfg.iterations {
        let anchors: Vec<Vec<f64>> = leaders.positions().iter().map(|p| p.to_vec()).collect();
        let anchors = [anchors[0].as_slice(), anchors[1].as_slice(), anchors[2].as_slice()];
        for wolf in wolves.iter_mut() {
            *wolf = hunt_step(wolf, anchors, t, cfg.iterations, &space.lower, &space.upper, &mut rng);
        }
        let scores = evaluate(&wolves);
        evaluations += scores.len();
        for (z, &s) in wolves.iter().zip(&scores) {
            leaders.offer(s, z);
        }
        history.push(leaders.best().0);
    }

    let (best_score, best_z) = leaders.best().clone();
    Ok(GwoResult {
        best_position: space.to_problem(&best_z),
        best_score,
        history,
        evaluations,
    })
}
