//! K-fold studies on external LF/HF tables.
//!
//! HF samples are split into near-equal folds. Each fold in turn is the HF
//! training set (with every LF sample); the fitted models are scored on a
//! separate test table when one is given, otherwise on the HF samples
//! outside the fold.
//!
//! Fold assignment is a function of sample identity: samples are first put
//! in canonical order (lexicographic on inputs, then response), then
//! shuffled with a seeded generator. Reordering the input file therefore
//! changes nothing.

use std::cmp::Ordering;
use std::time::Instant;

use cosvr_core::cosvr::{fit_cosvr, CoSvrSearch, MultiFidelityData, Objective};
use cosvr_core::doe::DomainBox;
use cosvr_core::lssvr::{fit_lssvr, LssvrBounds, SampleSet};
use cosvr_core::metrics::{r_squared, summarize, T_CRITICAL_95_DF58, T_CRITICAL_DOF};
use cosvr_core::seed::derive_seed;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{ExpError, Result};
use crate::io::{table_to_csv, ExternalDataset, SampleTable};
use crate::result::{CellMeta, ExperimentResult, ResampleCounts, ResultMeta, ResultRow};
use crate::spec::{GwoOverrides, ModelKind};

/// Path prefix of the fold-shuffle stream.
pub const CV_STREAM: u64 = 0x6376;

#[derive(Debug, Clone, Serialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub gwo: GwoOverrides,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    pub models: Vec<ModelKind>,
    /// Separate test table; `None` scores each fold on the other HF samples.
    #[serde(skip)]
    pub test: Option<SampleTable>,
}

impl CvOptions {
    pub fn new(folds: usize, seed: u64) -> Self {
        Self {
            folds,
            seed,
            gwo: GwoOverrides::default(),
            gamma: None,
            objective: None,
            models: vec![ModelKind::Cosvr, ModelKind::LssvrHf],
            test: None,
        }
    }
}

fn cmp_rows(t: &SampleTable, a: usize, b: usize) -> Ordering {
    (0..t.dim())
        .map(|k| t.points[(a, k)].total_cmp(&t.points[(b, k)]))
        .chain(std::iter::once(t.responses[a].total_cmp(&t.responses[b])))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Row indices of `t` in canonical order.
pub fn canonical_order(t: &SampleTable) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| cmp_rows(t, a, b));
    idx
}

/// Splits the rows of `hf` into `folds` groups whose sizes differ by at
/// most one. Each group lists row indices of `hf` in canonical order.
pub fn assign_folds(hf: &SampleTable, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(ExpError::Config(format!("folds must be at least 2, got {folds}")));
    }
    if hf.len() < folds {
        return Err(ExpError::Config(format!("{} HF samples cannot fill {folds} folds", hf.len())));
    }
    let mut order = canonical_order(hf);
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[CV_STREAM])));
    let (base, extra) = (hf.len() / folds, hf.len() % folds);
    let mut rest = order.as_slice();
    let mut out = Vec::with_capacity(folds);
    for f in 0..folds {
        let (fold, tail) = rest.split_at(base + usize::from(f < extra));
        let mut fold = fold.to_vec();
        fold.sort_by(|&a, &b| cmp_rows(hf, a, b));
        out.push(fold);
        rest = tail;
    }
    Ok(out)
}

/// Bounding box of the LF and HF inputs. Axes on which every sample
/// agrees are widened by 0.5 each way.
pub fn data_domain(data: &ExternalDataset) -> Result<DomainBox> {
    let intervals = (0..data.dim())
        .map(|k| {
            let (lf, hf) = (data.lf.points.column(k), data.hf.points.column(k));
            let (lo, hi) = lf.iter().chain(hf.iter()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if lo < hi {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        })
        .collect();
    Ok(DomainBox::new(intervals)?)
}

fn sample_set(t: &SampleTable, rows: &[usize], domain: &DomainBox) -> Result<SampleSet> {
    let points = DMatrix::from_fn(rows.len(), t.dim(), |i, k| t.points[(rows[i], k)]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| t.responses[i]));
    Ok(SampleSet::new(points, y, domain.clone())?)
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

struct FoldOutcome {
    r2: Vec<f64>,
    seconds: Vec<f64>,
    all_penalty: bool,
}

/// Runs the k-fold study. One result row per model, `m` empty.
pub fn run_cv(data: &ExternalDataset, opts: &CvOptions) -> Result<ExperimentResult> {
    let folds = assign_folds(&data.hf, opts.folds, opts.seed)?;
    if opts.models.is_empty() {
        return Err(ExpError::Config("models must name at least one model".into()));
    }
    let min_fold = if opts.models.contains(&ModelKind::LssvrHf) { 3 } else { 2 };
    let smallest = folds.iter().map(Vec::len).min().unwrap_or(0);
    if smallest < min_fold {
        return Err(ExpError::Config(format!(
            "{} HF samples in {} folds leaves {smallest} per fold; the requested models need at least {min_fold}",
            data.hf.len(),
            opts.folds
        )));
    }
    if let Some(test) = &opts.test {
        if test.columns != *data.columns() {
            return Err(ExpError::Data(format!(
                "test columns {:?} do not match training columns {:?}",
                test.columns,
                data.columns()
            )));
        }
    }
    let gamma = opts.gamma.unwrap_or(CoSvrSearch::DEFAULT_GAMMA);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ExpError::Config(format!("gamma must be positive and finite, got {gamma}")));
    }
    let objective = opts.objective.unwrap_or_default();
    let gwo = opts.gwo.options(0);
    if gwo.population < 4 || gwo.iterations == 0 {
        return Err(ExpError::Config(format!(
            "gwo needs population >= 4 and iterations >= 1, got {} and {}",
            gwo.population, gwo.iterations
        )));
    }

    let domain = data_domain(data)?;
    let s = data.dim();
    let lf = sample_set(&data.lf, &canonical_order(&data.lf), &domain)?;

    let outcomes: Vec<FoldOutcome> = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| -> Result<FoldOutcome> {
            let hf = sample_set(&data.hf, fold, &domain)?;
            let (test_points, test_y) = match &opts.test {
                Some(t) => (t.points.clone(), t.responses.clone()),
                None => {
                    let held: Vec<usize> = canonical_order(&data.hf).into_iter().filter(|i| !fold.contains(i)).collect();
                    let t = data.hf.select(&held);
                    (t.points, t.responses)
                }
            };
            let mut out = FoldOutcome {
                r2: Vec::new(),
                seconds: Vec::new(),
                all_penalty: false,
            };
            for model in &opts.models {
                let start = Instant::now();
                let pred = match model {
                    ModelKind::Cosvr => {
                        let mf = MultiFidelityData::new(lf.clone(), hf.clone())?;
                        let search = CoSvrSearch {
                            gamma,
                            objective,
                            ..CoSvrSearch::new(s)
                        };
                        let fit = fit_cosvr(&mf, &search, &opts.gwo.options(derive_seed(opts.seed, &[f as u64, 4])))?;
                        out.all_penalty |= fit.all_penalty;
                        fit.model.predict_rows(&test_points)?
                    }
                    ModelKind::LssvrHf => {
                        let fit = fit_lssvr(&hf, &LssvrBounds::new(s), &opts.gwo.options(derive_seed(opts.seed, &[f as u64, 5])))?;
                        fit.model.predict_rows(&test_points)?
                    }
                };
                out.r2.push(r_squared(&test_y, &pred)?);
                out.seconds.push(start.elapsed().as_secs_f64());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (k, &model) in opts.models.iter().enumerate() {
        let per_fold: Vec<f64> = outcomes.iter().map(|o| o.r2[k]).collect();
        rows.push(ResultRow {
            family: "external".into(),
            m: None,
            model,
            summary: summarize(&per_fold)?,
            pearson_r2: None,
            seed: opts.seed,
            wall_time_s: outcomes.iter().map(|o| o.seconds[k]).sum(),
        });
    }

    let options = toml::to_string(opts).expect("cv options serialize to TOML");
    let test_text = opts.test.as_ref().map(table_to_csv).unwrap_or_default();
    let canonical = |t: &SampleTable| table_to_csv(&t.select(&canonical_order(t)));
    let spec_hash = digest(&[&options, &canonical(&data.lf), &canonical(&data.hf), &test_text]);
    Ok(ExperimentResult {
        rows,
        meta: ResultMeta {
            kind: "cv",
            version: env!("CARGO_PKG_VERSION"),
            spec_hash,
            family: "external".into(),
            domain_label: "data".into(),
            domain,
            hf_budget: data.hf.len(),
            lf_budget: Some(data.lf.len()),
            repeats: opts.folds,
            test_points: opts.test.as_ref().map(SampleTable::len),
            seed: opts.seed,
            gwo_population: gwo.population,
            gwo_iterations: gwo.iterations,
            gamma,
            objective,
            t_critical: T_CRITICAL_95_DF58,
            t_critical_dof: T_CRITICAL_DOF,
            cells: vec![CellMeta {
                m: None,
                resampled: ResampleCounts::default(),
                all_penalty_fits: outcomes.iter().filter(|o| o.all_penalty).count(),
            }],
        },
    })
}
