//! Aggregated results of a sweep or cross-validation run.

use cosvr_core::doe::DomainBox;
use cosvr_core::metrics::AccuracySummary;
use serde::Serialize;

use crate::io::result_csv;
use crate::spec::ModelKind;

/// One `(m, model)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub family: String,
    /// Correlation knob; `None` for external data.
    pub m: Option<f64>,
    pub model: ModelKind,
    pub summary: AccuracySummary,
    /// Squared HF/LF Pearson correlation on the r² test set.
    pub pearson_r2: Option<f64>,
    pub seed: u64,
    /// Summed wall time of the fits and predictions behind this row.
    pub wall_time_s: f64,
}

/// Redraws needed to keep every DoE point inside the evaluable domain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ResampleCounts {
    pub hf: usize,
    pub lf: usize,
    pub test: usize,
    pub r2_test: usize,
}

impl std::ops::AddAssign for ResampleCounts {
    fn add_assign(&mut self, o: Self) {
        self.hf += o.hf;
        self.lf += o.lf;
        self.test += o.test;
        self.r2_test += o.r2_test;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub resampled: ResampleCounts,
    /// Co_SVR fits whose whole search scored the failure penalty.
    pub all_penalty_fits: usize,
}

/// Deterministic description of how a result was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultMeta {
    pub kind: &'static str,
    pub version: &'static str,
    pub spec_hash: String,
    pub family: String,
    pub domain_label: String,
    pub domain: DomainBox,
    pub hf_budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lf_budget: Option<usize>,
    pub repeats: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_points: Option<usize>,
    pub seed: u64,
    pub gwo_population: usize,
    pub gwo_iterations: usize,
    pub gamma: f64,
    pub objective: cosvr_core::cosvr::Objective,
    /// Decision threshold for comparing two models' repeat R² with a t
    /// statistic.
    pub t_critical: f64,
    pub t_critical_dof: usize,
    pub cells: Vec<CellMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub meta: ResultMeta,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentResult {
    pub const COLUMNS: [&'static str; 8] = [
        "family",
        "m",
        "model",
        "mean_r2",
        "std_r2",
        "pearson_r2",
        "n_repeats",
        "seed",
    ];

    pub fn row(&self, m: Option<f64>, model: ModelKind) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.m == m && r.model == model)
    }

    pub fn to_csv(&self) -> String {
        result_csv(
            &Self::COLUMNS,
            self.rows.iter().map(|r| {
                vec![
                    r.family.clone(),
                    opt(r.m),
                    r.model.to_string(),
                    r.summary.mean_r2.to_string(),
                    r.summary.std_r2.to_string(),
                    opt(r.pearson_r2),
                    r.summary.n_repeats.to_string(),
                    r.seed.to_string(),
                ]
            }),
        )
    }

    pub fn repeats_csv(&self) -> String {
        result_csv(
            &["m", "model", "repeat", "r2"],
            self.rows.iter().flat_map(|r| {
                r.summary
                    .per_repeat
                    .iter()
                    .enumerate()
                    .map(move |(i, v)| vec![opt(r.m), r.model.to_string(), i.to_string(), v.to_string()])
            }),
        )
    }

    pub fn timing_csv(&self) -> String {
        result_csv(
            &["m", "model", "wall_time_s"],
            self.rows
                .iter()
                .map(|r| vec![opt(r.m), r.model.to_string(), r.wall_time_s.to_string()]),
        )
    }

    pub fn meta_toml(&self) -> String {
        let note = "# wall_time lives in the .timing.csv sidecar and is excluded from determinism checks\n";
        format!("{note}{}", toml::to_string(&self.meta).expect("result metadata serializes to TOML"))
    }
}
