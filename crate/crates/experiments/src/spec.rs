//! Declarative experiment configuration.
//!
//! A config file is a flat TOML document whose keys are the fields of
//! [`ExperimentSpec`]; unknown keys are rejected.
//!
//! ```toml
//! family = "currin"
//! m_grid = [0.0, 0.25, 0.5, 0.75, 1.0]
//! hf_budget = "2s"
//! lf_budget = "10s"
//! repeats = 30
//! test_points = 1000
//! seed = 7
//! models = ["cosvr", "lssvr_hf"]
//! gwo = { population = 30, iterations = 200 }
//! domain_override = "half"             # preset name, or [[lo, hi], ...]
//! gamma = 1e4
//! objective = "leave_one_out"
//! ```

use std::fmt;

use cosvr_core::benchmarks::{self, BenchmarkFamily};
use cosvr_core::cosvr::{CoSvrSearch, Objective};
use cosvr_core::doe::DomainBox;
use cosvr_core::gwo::GwoOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ExpError, Result};

/// A sample budget: a literal count or a multiple of the input dimension
/// written `"<k>s"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Count(usize),
    Rule(String),
}

impl Budget {
    pub fn expand(&self, dimension: usize) -> Result<usize> {
        let n = match self {
            Budget::Count(n) => *n,
            Budget::Rule(rule) => {
                let k = rule
                    .strip_suffix('s')
                    .and_then(|k| k.trim().parse::<usize>().ok())
                    .ok_or_else(|| ExpError::Config(format!("budget rule {rule:?} is not of the form \"<k>s\"")))?;
                k * dimension
            }
        };
        if n == 0 {
            return Err(ExpError::Config("sample budgets must be positive".into()));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Multi-fidelity Co_SVR on LF + HF samples.
    Cosvr,
    /// Single-fidelity LS-SVR on the HF samples alone.
    LssvrHf,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Cosvr => "cosvr",
            ModelKind::LssvrHf => "lssvr_hf",
        })
    }
}

/// Optional overrides of the default optimizer budget (30 wolves, 200
/// iterations). The optimizer seed is derived per fit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GwoOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

impl GwoOverrides {
    pub fn options(&self, seed: u64) -> GwoOptions {
        let d = GwoOptions::default();
        GwoOptions {
            population: self.population.unwrap_or(d.population),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainOverride {
    Preset(String),
    Intervals(DomainBox),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: String,
    pub m_grid: Vec<f64>,
    pub hf_budget: Budget,
    pub lf_budget: Budget,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default)]
    pub gwo: GwoOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_override: Option<DomainOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
}

fn default_repeats() -> usize {
    30
}

fn default_test_points() -> usize {
    1000
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Cosvr]
}

/// A validated spec with budgets expanded and the family resolved.
#[derive(Debug, Clone)]
pub struct ResolvedSpec {
    pub spec: ExperimentSpec,
    pub family: &'static BenchmarkFamily,
    pub domain: DomainBox,
    /// `"default"`, `"preset:<name>"` or `"custom"`.
    pub domain_label: String,
    pub hf_n: usize,
    pub lf_n: usize,
    pub gamma: f64,
    pub objective: Objective,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs serialize to TOML")
    }

    /// SHA-256 of the canonical TOML serialization, as lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks every invariant and expands budgets. Nothing is computed
    /// before this succeeds.
    pub fn resolve(&self) -> Result<ResolvedSpec> {
        if self.family == "external" {
            return Err(ExpError::Config(
                "sweeps need a registered benchmark family; use `cv` for external data".into(),
            ));
        }
        let family = benchmarks::family(&self.family).ok_or_else(|| {
            let names: Vec<&str> = benchmarks::families().iter().map(|f| f.name).collect();
            ExpError::Config(format!("unknown family {:?} (expected one of {names:?})", self.family))
        })?;

        if self.m_grid.is_empty() {
            return Err(ExpError::Config("m_grid must not be empty".into()));
        }
        if let Some(m) = self.m_grid.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(ExpError::Config(format!("m_grid value {m} is outside [0, 1]")));
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExpError::Config("m_grid must be strictly increasing".into()));
        }
        if self.repeats == 0 {
            return Err(ExpError::Config("repeats must be at least 1".into()));
        }
        if self.test_points < 2 {
            return Err(ExpError::Config("test_points must be at least 2".into()));
        }
        if self.models.is_empty() {
            return Err(ExpError::Config("models must name at least one model".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].contains(m) {
                return Err(ExpError::Config(format!("model {m} is listed twice")));
            }
        }

        let s = family.dimension;
        let hf_n = self.hf_budget.expand(s)?;
        let lf_n = self.lf_budget.expand(s)?;
        let min_hf = if self.models.contains(&ModelKind::LssvrHf) { 3 } else { 2 };
        if hf_n < min_hf {
            return Err(ExpError::Config(format!("hf_budget expands to {hf_n}; the requested models need at least {min_hf}")));
        }

        let (domain, domain_label) = match &self.domain_override {
            None => (family.domain(), "default".to_string()),
            Some(DomainOverride::Preset(name)) => {
                let d = family.domain_preset(name).ok_or_else(|| {
                    let known: Vec<&str> = family.preset_names().collect();
                    ExpError::Config(format!("family {} has no domain preset {name:?} (known: {known:?})", family.name))
                })?;
                (d, format!("preset:{name}"))
            }
            Some(DomainOverride::Intervals(b)) => {
                if b.dim() != s {
                    return Err(ExpError::Config(format!(
                        "domain_override has {} axes but {} is {s}-dimensional",
                        b.dim(),
                        family.name
                    )));
                }
                (b.clone(), "custom".to_string())
            }
        };

        let gamma = self.gamma.unwrap_or(CoSvrSearch::DEFAULT_GAMMA);
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ExpError::Config(format!("gamma must be positive and finite, got {gamma}")));
        }
        let gwo = self.gwo.options(0);
        if gwo.population < 4 || gwo.iterations == 0 {
            return Err(ExpError::Config(format!(
                "gwo needs population >= 4 and iterations >= 1, got {} and {}",
                gwo.population, gwo.iterations
            )));
        }

        Ok(ResolvedSpec {
            spec: self.clone(),
            family,
            domain,
            domain_label,
            hf_n,
            lf_n,
            gamma,
            objective: self.objective.unwrap_or_default(),
        })
    }
}
