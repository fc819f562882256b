//! Repeated-DoE sweeps over the correlation knob `m`.
//!
//! Seeds, all from [`derive_seed`] on the spec's master seed:
//!
//! | stream                     | path                          |
//! |----------------------------|-------------------------------|
//! | repeat `i` at grid index `j` | `sub = [i, j]`              |
//! | HF design                  | `sub` then `[1]`              |
//! | LF design                  | `sub` then `[2]`              |
//! | R² test points             | `sub` then `[3]`              |
//! | Co_SVR search              | `sub` then `[4]`              |
//! | LS-SVR search              | `sub` then `[5]`              |
//! | r² test points at `m`      | `[R2_STREAM, m.to_bits()]`    |
//!
//! The HF/LF designs are exactly those of `doe::make_mf_doe(domain, hf, lf, sub)`
//! unless a point has to be redrawn.

use std::time::Instant;

use cosvr_core::benchmarks::BenchmarkFamily;
use cosvr_core::cosvr::{fit_cosvr, CoSvrSearch, MultiFidelityData};
use cosvr_core::doe::{lhs_checked, uniform_checked, DomainBox};
use cosvr_core::lssvr::{fit_lssvr, LssvrBounds, SampleSet};
use cosvr_core::metrics::{pearson_r2, r_squared, summarize, T_CRITICAL_95_DF58, T_CRITICAL_DOF};
use cosvr_core::seed::derive_seed;
use rayon::prelude::*;

use crate::error::Result;
use crate::result::{CellMeta, ExperimentResult, ResampleCounts, ResultMeta, ResultRow};
use crate::spec::{ExperimentSpec, ModelKind, ResolvedSpec};

/// Path prefix of the r² test-point stream.
pub const R2_STREAM: u64 = 0x7232;

/// Validates `spec` and runs the sweep.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_resolved(&spec.resolve()?)
}

struct Outcome {
    r2: Vec<f64>,
    seconds: Vec<f64>,
    resampled: ResampleCounts,
    all_penalty: bool,
}

fn accept<'a>(family: &'a BenchmarkFamily, m: f64) -> impl Fn(&[f64]) -> bool + 'a {
    move |x| family.hf(x).is_ok() && family.lf(x, m).is_ok()
}

/// Squared HF/LF correlation at `m` on `n` uniform points, and the number
/// of points that had to be redrawn.
pub fn r2_test_set(family: &BenchmarkFamily, domain: &DomainBox, m: f64, n: usize, seed: u64) -> Result<(f64, usize)> {
    let design = uniform_checked(n, domain, derive_seed(seed, &[R2_STREAM, m.to_bits()]), accept(family, m))?;
    let y_h = family.eval_hf_rows(&design.points)?;
    let y_l = family.eval_lf_rows(&design.points, m)?;
    Ok((pearson_r2(y_h.as_slice(), y_l.as_slice())?, design.resampled))
}

fn run_repeat(r: &ResolvedSpec, m_index: usize, repeat: usize) -> Result<Outcome> {
    let family = r.family;
    let m = r.spec.m_grid[m_index];
    let sub = derive_seed(r.spec.seed, &[repeat as u64, m_index as u64]);
    let ok = accept(family, m);
    let hf = lhs_checked(r.hf_n, &r.domain, derive_seed(sub, &[1]), &ok)?;
    let lf = lhs_checked(r.lf_n, &r.domain, derive_seed(sub, &[2]), &ok)?;
    let test = uniform_checked(r.spec.test_points, &r.domain, derive_seed(sub, &[3]), &ok)?;

    let hf_set = SampleSet::new(hf.points.clone(), family.eval_hf_rows(&hf.points)?, r.domain.clone())?;
    let y_test = family.eval_hf_rows(&test.points)?;
    let score = |pred: Vec<f64>| r_squared(y_test.as_slice(), &pred);

    let mut out = Outcome {
        r2: Vec::new(),
        seconds: Vec::new(),
        resampled: ResampleCounts {
            hf: hf.resampled,
            lf: lf.resampled,
            test: test.resampled,
            r2_test: 0,
        },
        all_penalty: false,
    };
    for model in &r.spec.models {
        let start = Instant::now();
        let r2 = match model {
            ModelKind::Cosvr => {
                let lf_set = SampleSet::new(lf.points.clone(), family.eval_lf_rows(&lf.points, m)?, r.domain.clone())?;
                let data = MultiFidelityData::new(lf_set, hf_set.clone())?;
                let search = CoSvrSearch {
                    gamma: r.gamma,
                    objective: r.objective,
                    ..CoSvrSearch::new(family.dimension)
                };
                let fit = fit_cosvr(&data, &search, &r.spec.gwo.options(derive_seed(sub, &[4])))?;
                out.all_penalty |= fit.all_penalty;
                score(fit.model.predict_rows(&test.points)?)?
            }
            ModelKind::LssvrHf => {
                let bounds = LssvrBounds::new(family.dimension);
                let fit = fit_lssvr(&hf_set, &bounds, &r.spec.gwo.options(derive_seed(sub, &[5])))?;
                score(fit.model.predict_rows(&test.points)?)?
            }
        };
        out.r2.push(r2);
        out.seconds.push(start.elapsed().as_secs_f64());
    }
    Ok(out)
}

/// Runs a resolved spec. Work items `(m index, repeat)` run in parallel;
/// results are assembled in `(m index, repeat)` order.
pub fn run_resolved(r: &ResolvedSpec) -> Result<ExperimentResult> {
    let items: Vec<(usize, usize)> = (0..r.spec.m_grid.len())
        .flat_map(|j| (0..r.spec.repeats).map(move |i| (j, i)))
        .collect();
    let outcomes: Vec<Outcome> = items
        .par_iter()
        .map(|&(j, i)| run_repeat(r, j, i))
        .collect::<Result<_>>()?;
    let r2_cols: Vec<(f64, usize)> = r
        .spec
        .m_grid
        .par_iter()
        .map(|&m| r2_test_set(r.family, &r.domain, m, r.spec.test_points, r.spec.seed))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (j, &m) in r.spec.m_grid.iter().enumerate() {
        let block = &outcomes[j * r.spec.repeats..(j + 1) * r.spec.repeats];
        let (pearson, r2_resampled) = r2_cols[j];
        let mut resampled = ResampleCounts {
            r2_test: r2_resampled,
            ..Default::default()
        };
        for o in block {
            resampled += o.resampled;
        }
        cells.push(CellMeta {
            m: Some(m),
            resampled,
            all_penalty_fits: block.iter().filter(|o| o.all_penalty).count(),
        });
        for (k, &model) in r.spec.models.iter().enumerate() {
            let per_repeat: Vec<f64> = block.iter().map(|o| o.r2[k]).collect();
            rows.push(ResultRow {
                family: r.family.name.to_string(),
                m: Some(m),
                model,
                summary: summarize(&per_repeat)?,
                pearson_r2: Some(pearson),
                seed: r.spec.seed,
                wall_time_s: block.iter().map(|o| o.seconds[k]).sum(),
            });
        }
    }

    let gwo = r.spec.gwo.options(0);
    Ok(ExperimentResult {
        rows,
        meta: ResultMeta {
            kind: "sweep",
            version: env!("CARGO_PKG_VERSION"),
            spec_hash: r.spec.hash(),
            family: r.family.name.to_string(),
            domain_label: r.domain_label.clone(),
            domain: r.domain.clone(),
            hf_budget: r.hf_n,
            lf_budget: Some(r.lf_n),
            repeats: r.spec.repeats,
            test_points: Some(r.spec.test_points),
            seed: r.spec.seed,
            gwo_population: gwo.population,
            gwo_iterations: gwo.iterations,
            gamma: r.gamma,
            objective: r.objective,
            t_critical: T_CRITICAL_95_DF58,
            t_critical_dof: T_CRITICAL_DOF,
            cells,
        },
    })
}

/// Dense Monte Carlo r²(m) curve on `n` uniform points of the family's
/// domain: one `(m, r²)` pair per grid value.
pub fn r2_curve(family: &BenchmarkFamily, domain: &DomainBox, m_grid: &[f64], n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    m_grid
        .par_iter()
        .map(|&m| Ok((m, r2_test_set(family, domain, m, n, seed)?.0)))
        .collect()
}
