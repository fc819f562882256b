//! Single-fidelity least-squares SVR.
//!
//! Training solves `[[K + I/γ, 1], [1ᵀ, 0]] [α; b] = [y; 0]` and prediction is
//! `ŷ(x) = Σ αᵢ K(xᵢ, x) + b`. Inputs are mapped to the unit cube of the
//! sample domain before any kernel evaluation, so `θ` acts on unit-scaled
//! coordinates. The solve runs on standardized responses; `α` and `b` are
//! stored back in response units, where the same linear system holds.

use nalgebra::{DMatrix, DVector};

use crate::doe::DomainBox;
use crate::error::check_dim;
use crate::gwo::{self, GwoConfig, GwoOptions, GwoResult};
use crate::kernels::{gram, kernel_row, KernelParams};
use crate::linalg::{solve_bordered, BorderedSolve};
use crate::transform::{point_to_unit, to_unit, ResponseScaling};
use crate::{Error, Result, PENALTY};

/// Tolerance for points sitting on the domain boundary.
const DOMAIN_TOL: f64 = 1e-12;

/// Input points (one per row) with aligned responses at a single fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: DMatrix<f64>,
    responses: DVector<f64>,
    domain: DomainBox,
}

impl SampleSet {
    pub fn new(points: DMatrix<f64>, responses: DVector<f64>, domain: DomainBox) -> Result<Self> {
        if points.nrows() != responses.len() {
            return Err(Error::Data(format!(
                "{} points but {} responses",
                points.nrows(),
                responses.len()
            )));
        }
        check_dim(domain.dim(), points.ncols())?;
        if points.iter().chain(responses.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("sample values must be finite".into()));
        }
        for i in 0..points.nrows() {
            let row: Vec<f64> = points.row(i).iter().copied().collect();
            if !domain.contains(&row, DOMAIN_TOL) {
                return Err(Error::Data(format!("sample {} at {row:?} lies outside the domain", i + 1)));
            }
        }
        Ok(Self {
            points,
            responses,
            domain,
        })
    }

    /// Builds a sample set from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], responses: Vec<f64>, domain: DomainBox) -> Result<Self> {
        let s = domain.dim();
        for r in rows {
            check_dim(s, r.len())?;
        }
        let points = DMatrix::from_fn(rows.len(), s, |i, k| rows[i][k]);
        Self::new(points, DVector::from_vec(responses), domain)
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Subset by row indices, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let s = self.dim();
        Self {
            points: DMatrix::from_fn(rows.len(), s, |i, k| self.points[(rows[i], k)]),
            responses: DVector::from_fn(rows.len(), |i, _| self.responses[rows[i]]),
            domain: self.domain.clone(),
        }
    }
}

/// A trained single-fidelity model.
#[derive(Debug, Clone, PartialEq)]
pub struct LssvrModel {
    alpha: DVector<f64>,
    bias: f64,
    kernel: KernelParams,
    gamma: f64,
    training: SampleSet,
    unit_points: DMatrix<f64>,
    condition: f64,
}

impl LssvrModel {
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn training(&self) -> &SampleSet {
        &self.training
    }

    /// 1-norm condition estimate of the bordered training system.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `Σ αᵢ K(xᵢ, x) + b`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.training.dim(), x.len())?;
        let u = point_to_unit(x, self.training.domain());
        let k = kernel_row(&u, &self.unit_points, &self.kernel);
        Ok(k.iter().zip(self.alpha.iter()).map(|(k, a)| k * a).sum::<f64>() + self.bias)
    }

    pub fn predict_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>> {
        (0..points.nrows())
            .map(|i| self.predict(points.row(i).iter().copied().collect::<Vec<_>>().as_slice()))
            .collect()
    }
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && !gamma.is_nan() {
        Ok(())
    } else {
        Err(Error::Config(format!("gamma must be positive, got {gamma}")))
    }
}

struct Solved {
    solve: BorderedSolve,
    scaling: ResponseScaling,
}

fn solve_standardized(
    unit_points: &DMatrix<f64>,
    y: &DVector<f64>,
    kernel: &KernelParams,
    gamma: f64,
) -> Result<Solved> {
    let scaling = ResponseScaling::fit(y);
    let k = gram(unit_points, kernel);
    let solve = solve_bordered(&k, gamma, &scaling.standardize(y), || {
        format!("LS-SVR with gamma = {gamma:e}, theta = {:?}", kernel.theta)
    })?;
    Ok(Solved { solve, scaling })
}

/// Trains an LS-SVR with fixed kernel parameters and regularization `γ`.
pub fn train_lssvr(data: &SampleSet, kernel: &KernelParams, gamma: f64) -> Result<LssvrModel> {
    if data.len() < 2 {
        return Err(Error::Config(format!("LS-SVR needs at least 2 samples, got {}", data.len())));
    }
    validate_gamma(gamma)?;
    kernel.validate()?;
    check_dim(data.dim(), kernel.dim())?;

    let unit_points = to_unit(data.points(), data.domain());
    let Solved { solve, scaling } = solve_standardized(&unit_points, data.responses(), kernel, gamma)?;
    Ok(LssvrModel {
        alpha: solve.alpha.map(|a| a * scaling.std),
        bias: solve.bias * scaling.std + scaling.mean,
        kernel: kernel.clone(),
        gamma,
        training: data.clone(),
        unit_points,
        condition: solve.condition,
    })
}

/// `ŷ(x)` of a trained model.
pub fn predict_lssvr(model: &LssvrModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Search box for the single-fidelity baseline: `θ` per input dimension and
/// `γ`, both log-scaled. The kernel scale is fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LssvrBounds {
    pub theta: Vec<(f64, f64)>,
    pub gamma: (f64, f64),
}

impl LssvrBounds {
    /// `θ ∈ [1e-3, 1e3]`, `γ ∈ [1e-2, 1e6]`.
    pub fn new(dim: usize) -> Self {
        Self {
            theta: vec![(1e-3, 1e3); dim],
            gamma: (1e-2, 1e6),
        }
    }

    fn gwo_config(&self, options: GwoOptions) -> GwoConfig {
        let mut bounds = self.theta.clone();
        bounds.push(self.gamma);
        let n = bounds.len();
        GwoConfig::new(options, bounds, vec![true; n])
    }
}

#[derive(Debug, Clone)]
pub struct LssvrFit {
    pub model: LssvrModel,
    pub search: GwoResult,
}

/// Leave-one-out RMSE of an LS-SVR, or [`PENALTY`] if training fails.
pub fn lssvr_loo_rmse(data: &SampleSet, kernel: &KernelParams, gamma: f64) -> f64 {
    let unit = to_unit(data.points(), data.domain());
    loo_rmse_unit(&unit, data.responses(), kernel, gamma)
}

fn loo_rmse_unit(unit: &DMatrix<f64>, y: &DVector<f64>, kernel: &KernelParams, gamma: f64) -> f64 {
    match solve_standardized(unit, y, kernel, gamma) {
        Ok(Solved { solve, scaling }) => {
            let r = solve.loo_residuals();
            let rmse = (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt() * scaling.std;
            if rmse.is_finite() {
                rmse
            } else {
                PENALTY
            }
        }
        Err(_) => PENALTY,
    }
}

/// Tunes `θ` and `γ` by minimizing leave-one-out RMSE with the grey wolf
/// optimizer, then trains at the best position.
pub fn fit_lssvr(data: &SampleSet, bounds: &LssvrBounds, options: &GwoOptions) -> Result<LssvrFit> {
    check_dim(data.dim(), bounds.theta.len())?;
    if data.len() < 3 {
        return Err(Error::Config(format!(
            "leave-one-out tuning needs at least 3 samples, got {}",
            data.len()
        )));
    }
    let cfg = bounds.gwo_config(*options);
    let s = data.dim();
    let unit = to_unit(data.points(), data.domain());
    let y = data.responses();
    let objective = |pos: &[f64]| {
        let kernel = KernelParams {
            sigma: 1.0,
            theta: pos[..s].to_vec(),
        };
        loo_rmse_unit(&unit, y, &kernel, pos[s])
    };
    let search = gwo::minimize(objective, &cfg)?;
    let kernel = KernelParams::new(1.0, search.best_position[..s].to_vec())?;
    let model = train_lssvr(data, &kernel, search.best_position[s])?;
    Ok(LssvrFit { model, search })
}

#[cfg(test)]
mod tests {
    #![allow(clippy::needless_range_loop)]

    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_set(xs: &[f64], ys: &[f64]) -> SampleSet {
        SampleSet::new(
            DMatrix::from_column_slice(xs.len(), 1, xs),
            DVector::from_column_slice(ys),
            DomainBox::unit(1),
        )
        .unwrap()
    }

    /// Gauss-Jordan elimination with full pivoting, independent of the LU path.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        let mut cols: Vec<usize> = (0..n).collect();
        for piv in 0..n {
            let (mut pr, mut pc, mut best) = (piv, piv, 0.0);
            for r in piv..n {
                for c in piv..n {
                    if a[r][c].abs() > best {
                        best = a[r][c].abs();
                        pr = r;
                        pc = c;
                    }
                }
            }
            a.swap(piv, pr);
            b.swap(piv, pr);
            for row in a.iter_mut() {
                row.swap(piv, pc);
            }
            cols.swap(piv, pc);
            for r in 0..n {
                if r != piv {
                    let f = a[r][piv] / a[piv][piv];
                    for c in piv..n {
                        a[r][c] -= f * a[piv][c];
                    }
                    b[r] -= f * b[piv];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[cols[i]] = b[i] / a[i][i];
        }
        x
    }

    #[test]
    fn constant_response_goes_to_bias() {
        let d = unit_set(&[0.2, 0.8], &[4.25, 4.25]);
        let m = train_lssvr(&d, &KernelParams::new(1.0, vec![1.0]).unwrap(), 10.0).unwrap();
        assert!((m.bias() - 4.25).abs() < 1e-12);
        assert!(m.alpha().iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn matches_dense_oracle() {
        let xs = [0.05, 0.31, 0.47, 0.72, 0.93];
        let ys = [0.4, -1.2, 0.9, 2.3, -0.7];
        let gamma = 10.0;
        let m = train_lssvr(&unit_set(&xs, &ys), &KernelParams::new(1.0, vec![1.0]).unwrap(), gamma).unwrap();

        let mut a = vec![vec![0.0; 6]; 6];
        for i in 0..5 {
            for j in 0..5 {
                a[i][j] = (-(xs[i] - xs[j]).powi(2)).exp() + if i == j { 1.0 / gamma } else { 0.0 };
            }
            a[i][5] = 1.0;
            a[5][i] = 1.0;
        }
        let mut rhs = ys.to_vec();
        rhs.push(0.0);
        let sol = dense_solve(a, rhs);
        for i in 0..5 {
            assert!((m.alpha()[i] - sol[i]).abs() < 1e-8 * (1.0 + sol[i].abs()));
        }
        assert!((m.bias() - sol[5]).abs() < 1e-8 * (1.0 + sol[5].abs()));
        assert!(m.alpha().sum().abs() < 1e-8 * (1.0 + m.alpha().lp_norm(1)));
    }

    #[test]
    fn predictions_follow_the_kernel_sum() {
        let xs = [0.1, 0.4, 0.6, 0.95];
        let ys = [1.0, 3.0, -2.0, 0.5];
        let kernel = KernelParams::new(1.7, vec![6.0]).unwrap();
        let m = train_lssvr(&unit_set(&xs, &ys), &kernel, 30.0).unwrap();
        for x in [0.0, 0.33, 0.77, 1.0] {
            let oracle: f64 = xs
                .iter()
                .zip(m.alpha().iter())
                .map(|(xi, a)| a * 1.7 * (-6.0 * (xi - x) * (xi - x)).exp())
                .sum::<f64>()
                + m.bias();
            assert!((m.predict(&[x]).unwrap() - oracle).abs() < 1e-12);
        }
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let expect = y - m.alpha()[i] / 30.0;
            assert!((m.predict(&[x]).unwrap() - expect).abs() < 1e-9);
        }
        assert!(matches!(m.predict(&[0.1, 0.2]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn zero_weights_predict_bias() {
        let d = unit_set(&[0.1, 0.9, 0.5], &[3.2, 3.2, 3.2]);
        let m = train_lssvr(&d, &KernelParams::new(1.0, vec![2.0]).unwrap(), 100.0).unwrap();
        assert!((m.predict(&[0.123]).unwrap() - 3.2).abs() < 1e-12);
    }

    #[test]
    fn large_gamma_interpolates() {
        let xs = [0.0, 0.2, 0.5, 0.7, 1.0];
        let ys = [1.0, 0.2, -0.4, 0.9, 1.6];
        let m = train_lssvr(&unit_set(&xs, &ys), &KernelParams::new(1.0, vec![20.0]).unwrap(), 1e6).unwrap();
        let rmse = (xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| (m.predict(&[x]).unwrap() - y).powi(2))
            .sum::<f64>()
            / 5.0)
            .sqrt();
        assert!(rmse < 1e-3 * 2.0, "{rmse}");
    }

    #[test]
    fn ill_conditioned_system_names_hyperparameters() {
        // Duplicate points with an effectively zero ridge.
        let d = unit_set(&[0.5, 0.5, 0.5], &[1.0, 2.0, 3.0]);
        let err = train_lssvr(&d, &KernelParams::new(1.0, vec![1.0]).unwrap(), 1e300).unwrap_err();
        match err {
            Error::IllConditioned { context, .. } => {
                assert!(context.contains("gamma") && context.contains("theta"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = unit_set(&[0.5, 0.6], &[1.0, 2.0]);
        let k = KernelParams::new(1.0, vec![1.0]).unwrap();
        assert!(train_lssvr(&d, &k, 0.0).is_err());
        assert!(train_lssvr(&unit_set(&[0.5], &[1.0]), &k, 1.0).is_err());
        assert!(train_lssvr(&d, &KernelParams::new(1.0, vec![1.0, 1.0]).unwrap(), 1.0).is_err());
        assert!(SampleSet::new(
            DMatrix::from_row_slice(1, 1, &[1.5]),
            DVector::from_vec(vec![0.0]),
            DomainBox::unit(1)
        )
        .is_err());
    }

    #[test]
    fn fit_on_constant_data_predicts_constant() {
        let d = unit_set(&[0.1, 0.3, 0.5, 0.8], &[-2.0; 4]);
        let fit = fit_lssvr(&d, &LssvrBounds::new(1), &GwoOptions { population: 6, iterations: 5, seed: 0 }).unwrap();
        assert!(fit.search.best_score < 1e-12);
        assert!((fit.model.predict(&[0.42]).unwrap() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn fit_recovers_linear_function() {
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let d = unit_set(&xs, &xs);
        let fit = fit_lssvr(&d, &LssvrBounds::new(1), &GwoOptions { population: 20, iterations: 60, seed: 4 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let test: Vec<f64> = (0..100).map(|_| rng.random()).collect();
        let pred: Vec<f64> = test.iter().map(|&x| fit.model.predict(&[x]).unwrap()).collect();
        let r2 = crate::metrics::r_squared(&test, &pred).unwrap();
        assert!(r2 > 0.99, "{r2}");
    }

    #[test]
    fn fit_with_collapsed_bounds_returns_that_point() {
        let d = unit_set(&[0.1, 0.3, 0.5, 0.8], &[1.0, 0.0, 2.0, 1.5]);
        let bounds = LssvrBounds {
            theta: vec![(3.7, 3.7)],
            gamma: (250.0, 250.0),
        };
        let fit = fit_lssvr(&d, &bounds, &GwoOptions { population: 4, iterations: 2, seed: 0 }).unwrap();
        assert_eq!(fit.model.kernel().theta, vec![3.7]);
        assert_eq!(fit.model.gamma(), 250.0);
    }

    proptest! {
        #[test]
        fn kkt_identities_hold(
            xs in prop::collection::vec(0.0f64..1.0, 2..15),
            ys in prop::collection::vec(-50.0f64..50.0, 15),
            theta in 0.01f64..50.0,
            log_gamma in -2.0f64..5.0,
        ) {
            let n = xs.len();
            let gamma = 10f64.powf(log_gamma);
            let d = unit_set(&xs, &ys[..n]);
            let m = match train_lssvr(&d, &KernelParams::new(1.0, vec![theta]).unwrap(), gamma) {
                Ok(m) => m,
                Err(Error::IllConditioned { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let ymax = ys[..n].iter().fold(0.0f64, |a, y| a.max(y.abs()));
            for i in 0..n {
                let r = ys[i] - m.predict(&[xs[i]]).unwrap() - m.alpha()[i] / gamma;
                prop_assert!(r.abs() <= 1e-6 * (1.0 + ymax));
            }
            prop_assert!(m.alpha().sum().abs() <= 1e-8 * (1.0 + m.alpha().lp_norm(1)));
        }

        #[test]
        fn permutation_equivariance(
            xs in prop::collection::vec(0.0f64..1.0, 6),
            ys in prop::collection::vec(-5.0f64..5.0, 6),
            shift in 1usize..6,
            probe in 0.0f64..1.0,
        ) {
            let k = KernelParams::new(1.0, vec![4.0]).unwrap();
            let perm: Vec<usize> = (0..6).map(|i| (i + shift) % 6).collect();
            let xp: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
            let yp: Vec<f64> = perm.iter().map(|&i| ys[i]).collect();
            let a = train_lssvr(&unit_set(&xs, &ys), &k, 50.0);
            let b = train_lssvr(&unit_set(&xp, &yp), &k, 50.0);
            if let (Ok(a), Ok(b)) = (a, b) {
                for (j, &i) in perm.iter().enumerate() {
                    prop_assert!((a.alpha()[i] - b.alpha()[j]).abs() < 1e-8 * (1.0 + a.alpha()[i].abs()));
                }
                prop_assert!((a.predict(&[probe]).unwrap() - b.predict(&[probe]).unwrap()).abs() < 1e-10);
            }
        }
    }
}
