//! Multi-fidelity Co_SVR: an LS-SVR over stacked LF and HF samples with the
//! four-block kernel from [`crate::kernels`].
//!
//! The dual system is the LS-SVR bordered system with `K` replaced by the
//! multi-fidelity kernel and `y = [y_L; y_H]`. Predictions of the HF response
//! use the H-L / H-H kernel rows. As in [`crate::lssvr`], inputs are mapped to
//! the unit cube and the solve runs on standardized responses; `α` and `b`
//! are stored in response units.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::doe::DomainBox;
use crate::error::check_dim;
use crate::gwo::{self, GwoConfig, GwoOptions, GwoResult};
use crate::kernels::{assemble_unchecked, cross_vector_unchecked};
use crate::linalg::{solve_bordered, BorderedSolve};
use crate::lssvr::SampleSet;
use crate::transform::{point_to_unit, to_unit, ResponseScaling};
use crate::{Error, Result, PENALTY};

/// LF and HF samples over a shared domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFidelityData {
    lf: SampleSet,
    hf: SampleSet,
}

impl MultiFidelityData {
    pub fn new(lf: SampleSet, hf: SampleSet) -> Result<Self> {
        check_dim(hf.dim(), lf.dim())?;
        if lf.domain() != hf.domain() {
            return Err(Error::Data("LF and HF samples must share one domain box".into()));
        }
        if lf.is_empty() {
            return Err(Error::Data("multi-fidelity data needs at least one LF sample".into()));
        }
        if hf.len() < 2 {
            return Err(Error::Data(format!("multi-fidelity data needs at least 2 HF samples, got {}", hf.len())));
        }
        Ok(Self { lf, hf })
    }

    pub fn lf(&self) -> &SampleSet {
        &self.lf
    }

    pub fn hf(&self) -> &SampleSet {
        &self.hf
    }

    pub fn domain(&self) -> &DomainBox {
        self.hf.domain()
    }

    pub fn dim(&self) -> usize {
        self.hf.dim()
    }

    /// `[y_L; y_H]`.
    pub fn stacked_responses(&self) -> DVector<f64> {
        let (p, q) = (self.lf.len(), self.hf.len());
        DVector::from_fn(p + q, |i, _| {
            if i < p {
                self.lf.responses()[i]
            } else {
                self.hf.responses()[i - p]
            }
        })
    }
}

/// Kernel parameters of the four-block kernel plus the ridge `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoSvrHyperparams {
    pub rho: f64,
    pub sigma_l: f64,
    pub sigma_d: f64,
    pub theta_l: Vec<f64>,
    pub theta_d: Vec<f64>,
    pub gamma: f64,
}

impl CoSvrHyperparams {
    pub fn dim(&self) -> usize {
        self.theta_l.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim(), self.theta_d.len())?;
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !self.rho.is_finite() {
            return Err(Error::Config(format!("rho must be finite, got {}", self.rho)));
        }
        if !nonneg(self.sigma_l) || !nonneg(self.sigma_d) {
            return Err(Error::Config(format!(
                "sigma_l and sigma_d must be finite and >= 0, got {} and {}",
                self.sigma_l, self.sigma_d
            )));
        }
        if let Some(t) = self.theta_l.iter().chain(&self.theta_d).find(|t| !nonneg(**t)) {
            return Err(Error::Config(format!("theta components must be finite and >= 0, got {t}")));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    /// GWO position `[ρ, σ_L, σ_d, θ_L…, θ_d…]`.
    pub fn to_position(&self) -> Vec<f64> {
        let mut x = vec![self.rho, self.sigma_l, self.sigma_d];
        x.extend(&self.theta_l);
        x.extend(&self.theta_d);
        x
    }

    pub fn from_position(x: &[f64], gamma: f64) -> Result<Self> {
        if x.len() < 5 || !(x.len() - 3).is_multiple_of(2) {
            return Err(Error::Config(format!("a position vector has 3 + 2s entries, got {}", x.len())));
        }
        let s = (x.len() - 3) / 2;
        Ok(Self {
            rho: x[0],
            sigma_l: x[1],
            sigma_d: x[2],
            theta_l: x[3..3 + s].to_vec(),
            theta_d: x[3 + s..].to_vec(),
            gamma,
        })
    }
}

/// A trained Co_SVR model.
#[derive(Debug, Clone, PartialEq)]
pub struct CoSvrModel {
    alpha: DVector<f64>,
    bias: f64,
    hp: CoSvrHyperparams,
    training: MultiFidelityData,
    scaling: ResponseScaling,
    unit_l: DMatrix<f64>,
    unit_h: DMatrix<f64>,
    condition: f64,
}

impl CoSvrModel {
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn hyperparams(&self) -> &CoSvrHyperparams {
        &self.hp
    }

    pub fn training(&self) -> &MultiFidelityData {
        &self.training
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Mean and standard deviation used to standardize training responses.
    pub fn response_scaling(&self) -> (f64, f64) {
        (self.scaling.mean, self.scaling.std)
    }

    /// HF prediction `Σ αᵢ kᵢ(x) + b`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.hp.dim(), x.len())?;
        let u = point_to_unit(x, self.training.domain());
        let k = cross_vector_unchecked(&u, &self.unit_l, &self.unit_h, &self.hp);
        Ok(k.iter().zip(self.alpha.iter()).map(|(k, a)| k * a).sum::<f64>() + self.bias)
    }

    pub fn predict_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>> {
        (0..points.nrows())
            .map(|i| self.predict(points.row(i).iter().copied().collect::<Vec<_>>().as_slice()))
            .collect()
    }

    /// Serializes the model as a TOML document.
    pub fn to_document(&self) -> String {
        let set = |s: &SampleSet| SampleDoc {
            points: (0..s.len()).map(|i| s.point(i)).collect(),
            responses: s.responses().iter().copied().collect(),
        };
        let doc = ModelDocument {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            hyperparams: self.hp.clone(),
            bias: self.bias,
            alpha: self.alpha.iter().copied().collect(),
            response_mean: self.scaling.mean,
            response_std: self.scaling.std,
            condition: self.condition,
            domain: self.training.domain().clone(),
            lf: set(self.training.lf()),
            hf: set(self.training.hf()),
        };
        toml::to_string(&doc).expect("model documents contain only finite numbers and plain tables")
    }

    /// Parses a document written by [`CoSvrModel::to_document`]. The stored
    /// `α` and `b` are used as-is; nothing is retrained.
    pub fn from_document(text: &str) -> Result<Self> {
        let doc: ModelDocument = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.format != FORMAT_TAG || doc.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "expected format {FORMAT_TAG} version {FORMAT_VERSION}, found {} version {}",
                doc.format, doc.version
            )));
        }
        doc.hyperparams.validate()?;
        let set = |s: SampleDoc| SampleSet::from_rows(&s.points, s.responses, doc.domain.clone());
        let training = MultiFidelityData::new(set(doc.lf)?, set(doc.hf)?)?;
        check_dim(training.dim(), doc.hyperparams.dim())?;
        check_dim(training.lf().len() + training.hf().len(), doc.alpha.len())?;
        Ok(Self {
            alpha: DVector::from_vec(doc.alpha),
            bias: doc.bias,
            unit_l: to_unit(training.lf().points(), training.domain()),
            unit_h: to_unit(training.hf().points(), training.domain()),
            hp: doc.hyperparams,
            training,
            scaling: ResponseScaling {
                mean: doc.response_mean,
                std: doc.response_std,
            },
            condition: doc.condition,
        })
    }
}

const FORMAT_TAG: &str = "cosvr-model";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    points: Vec<Vec<f64>>,
    responses: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    version: u32,
    bias: f64,
    alpha: Vec<f64>,
    response_mean: f64,
    response_std: f64,
    condition: f64,
    domain: DomainBox,
    hyperparams: CoSvrHyperparams,
    lf: SampleDoc,
    hf: SampleDoc,
}

/// Unit-scaled inputs and standardized responses, computed once per fit.
struct Prepared {
    unit_l: DMatrix<f64>,
    unit_h: DMatrix<f64>,
    y: DVector<f64>,
    scaling: ResponseScaling,
}

impl Prepared {
    fn new(data: &MultiFidelityData) -> Self {
        let y = data.stacked_responses();
        let scaling = ResponseScaling::fit(&y);
        Self {
            unit_l: to_unit(data.lf().points(), data.domain()),
            unit_h: to_unit(data.hf().points(), data.domain()),
            y: scaling.standardize(&y),
            scaling,
        }
    }

    fn solve(&self, hp: &CoSvrHyperparams) -> Result<BorderedSolve> {
        let k = assemble_unchecked(&self.unit_l, &self.unit_h, hp).into_values();
        solve_bordered(&k, hp.gamma, &self.y, || format!("Co_SVR with {hp:?}"))
    }

    fn cost(&self, hp: &CoSvrHyperparams, objective: Objective) -> f64 {
        let p = self.unit_l.nrows();
        let Ok(solve) = self.solve(hp) else {
            return PENALTY;
        };
        let residuals: Vec<f64> = match objective {
            Objective::TrainingRmse => solve.alpha.rows(p, self.unit_h.nrows()).iter().map(|a| a / hp.gamma).collect(),
            Objective::HfLeaveOneOut => solve.loo_residuals().rows(p, self.unit_h.nrows()).iter().copied().collect(),
            Objective::LeaveOneOut => solve.loo_residuals().iter().copied().collect(),
        };
        let rmse = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt() * self.scaling.std;
        if rmse.is_finite() {
            rmse
        } else {
            PENALTY
        }
    }
}

fn check_hyperparams(data: &MultiFidelityData, hp: &CoSvrHyperparams) -> Result<()> {
    hp.validate()?;
    check_dim(data.dim(), hp.dim())
}

/// Trains Co_SVR at fixed hyperparameters.
pub fn train_cosvr(data: &MultiFidelityData, hp: &CoSvrHyperparams) -> Result<CoSvrModel> {
    check_hyperparams(data, hp)?;
    let prep = Prepared::new(data);
    let solve = prep.solve(hp)?;
    let std = prep.scaling.std;
    Ok(CoSvrModel {
        alpha: solve.alpha.map(|a| a * std),
        bias: solve.bias * std + prep.scaling.mean,
        hp: hp.clone(),
        training: data.clone(),
        scaling: prep.scaling,
        unit_l: prep.unit_l,
        unit_h: prep.unit_h,
        condition: solve.condition,
    })
}

/// HF prediction of a trained model.
pub fn predict_cosvr(model: &CoSvrModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Quantity minimized by the hyperparameter search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// RMSE of the trained model at the HF training points, computed from
    /// the residual identity `y_j - ŷ(x_j) = α_j/γ`.
    TrainingRmse,
    /// RMSE of closed-form leave-one-out residuals `α_j / (A⁻¹)_jj` over the
    /// HF rows only.
    HfLeaveOneOut,
    /// RMSE of closed-form leave-one-out residuals over every LF and HF row.
    #[default]
    LeaveOneOut,
}

/// HF training RMSE, or [`PENALTY`] when training fails or the
/// hyperparameters are invalid.
pub fn cosvr_cost(data: &MultiFidelityData, hp: &CoSvrHyperparams) -> f64 {
    cosvr_objective(data, hp, Objective::TrainingRmse)
}

/// [`cosvr_cost`] generalized to any [`Objective`].
pub fn cosvr_objective(data: &MultiFidelityData, hp: &CoSvrHyperparams, objective: Objective) -> f64 {
    if check_hyperparams(data, hp).is_err() {
        return PENALTY;
    }
    Prepared::new(data).cost(hp, objective)
}

/// Search box over `[ρ, σ_L, σ_d, θ_L…, θ_d…]` with fixed `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoSvrSearch {
    pub rho: (f64, f64),
    pub sigma_l: (f64, f64),
    pub sigma_d: (f64, f64),
    pub theta_l: Vec<(f64, f64)>,
    pub theta_d: Vec<(f64, f64)>,
    pub gamma: f64,
    pub objective: Objective,
}

impl CoSvrSearch {
    pub const DEFAULT_GAMMA: f64 = 1e4;

    /// `ρ ∈ [0, 1]`, `σ`, `θ ∈ [1e-3, 1e3]` on a log scale, `γ = 1e4`,
    /// leave-one-out objective.
    pub fn new(dim: usize) -> Self {
        Self {
            rho: (0.0, 1.0),
            sigma_l: (1e-3, 1e3),
            sigma_d: (1e-3, 1e3),
            theta_l: vec![(1e-3, 1e3); dim],
            theta_d: vec![(1e-3, 1e3); dim],
            gamma: Self::DEFAULT_GAMMA,
            objective: Objective::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.theta_l.len()
    }

    fn gwo_config(&self, options: GwoOptions) -> GwoConfig {
        let mut bounds = vec![self.rho, self.sigma_l, self.sigma_d];
        bounds.extend(&self.theta_l);
        bounds.extend(&self.theta_d);
        let mut log = vec![true; bounds.len()];
        log[0] = false;
        GwoConfig::new(options, bounds, log)
    }
}

#[derive(Debug, Clone)]
pub struct CoSvrFit {
    pub model: CoSvrModel,
    pub search: GwoResult,
    /// Every evaluated position failed to train.
    pub all_penalty: bool,
}

/// Tunes the kernel parameters with the grey wolf optimizer and trains at
/// the best position found.
pub fn fit_cosvr(data: &MultiFidelityData, search: &CoSvrSearch, options: &GwoOptions) -> Result<CoSvrFit> {
    check_dim(data.dim(), search.dim())?;
    check_dim(data.dim(), search.theta_d.len())?;
    if !(search.gamma > 0.0 && search.gamma.is_finite()) {
        return Err(Error::Config(format!("gamma must be positive and finite, got {}", search.gamma)));
    }
    let cfg = search.gwo_config(*options);
    let prep = Prepared::new(data);
    let objective = |x: &[f64]| match CoSvrHyperparams::from_position(x, search.gamma) {
        Ok(hp) => prep.cost(&hp, search.objective),
        Err(_) => PENALTY,
    };
    let result = gwo::minimize(objective, &cfg)?;
    let hp = CoSvrHyperparams::from_position(&result.best_position, search.gamma)?;
    let model = train_cosvr(data, &hp)?;
    Ok(CoSvrFit {
        model,
        all_penalty: result.best_score == PENALTY,
        search: result,
    })
}
