//! Anisotropic Gaussian kernels and the four-block multi-fidelity kernel.
//!
//! With LF points `x_L` (p rows) and HF points `x_H` (q rows) the training
//! kernel is
//!
//! ```text
//!        ┌                                   ┐
//!        │ σ_L·G_L(x_L, x_L)   ρ²σ_L·G_L(x_L, x_H)                   │
//! K  =   │ ρ²σ_L·G_L(x_H, x_L) ρ²σ_L·G_L(x_H, x_H) + σ_d·G_d(x_H, x_H) │
//!        └                                   ┘
//! ```
//!
//! where `G(x, y) = exp(-Σ_k θ_k (x_k - y_k)²)`. The H-L block is the exact
//! transpose of the L-H block.

use nalgebra::DMatrix;

use crate::cosvr::CoSvrHyperparams;
use crate::error::check_dim;
use crate::{Error, Result};

/// Scale and per-dimension inverse length-scales of one Gaussian kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub sigma: f64,
    pub theta: Vec<f64>,
}

impl KernelParams {
    pub fn new(sigma: f64, theta: Vec<f64>) -> Result<Self> {
        let params = Self { sigma, theta };
        params.validate()?;
        Ok(params)
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("kernel sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if let Some(t) = self.theta.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::Config(format!("kernel theta components must be finite and >= 0, got {t}")));
        }
        Ok(())
    }
}

/// `Σ_k θ_k (a_k - b_k)²` without dimension checks.
#[inline]
pub(crate) fn weighted_sq_dist<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
    theta: &[f64],
) -> f64 {
    a.into_iter()
        .zip(b)
        .zip(theta)
        .map(|((x, y), t)| {
            let d = x - y;
            t * d * d
        })
        .sum()
}

/// `σ · exp(-Σ_k θ_k (x_i[k] - x_j[k])²)`.
pub fn gauss_kernel(x_i: &[f64], x_j: &[f64], params: &KernelParams) -> Result<f64> {
    check_dim(params.dim(), x_i.len())?;
    check_dim(params.dim(), x_j.len())?;
    Ok(params.sigma * (-weighted_sq_dist(x_i, x_j, &params.theta)).exp())
}

/// Gram matrix of a single Gaussian kernel over the rows of `points`.
pub(crate) fn gram(points: &DMatrix<f64>, params: &KernelParams) -> DMatrix<f64> {
    let n = points.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = params.sigma;
        for j in i + 1..n {
            let v = params.sigma * (-weighted_sq_dist(points.row(i).iter(), points.row(j).iter(), &params.theta)).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Kernel evaluations between `x` and every row of `points`.
pub(crate) fn kernel_row(x: &[f64], points: &DMatrix<f64>, params: &KernelParams) -> Vec<f64> {
    (0..points.nrows())
        .map(|i| params.sigma * (-weighted_sq_dist(x, points.row(i).iter(), &params.theta)).exp())
        .collect()
}

/// The symmetric `(p+q)×(p+q)` multi-fidelity kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MfsKernelMatrix {
    values: DMatrix<f64>,
    p: usize,
    q: usize,
}

impl MfsKernelMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// Number of LF rows.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of HF rows.
    pub fn q(&self) -> usize {
        self.q
    }
}

/// Entry-wise pieces of the block kernel. `cross` is the L-L / L-H / H-L
/// formula, `high` the H-H formula.
struct BlockKernel<'a> {
    cross_scale: f64,
    sigma_l: f64,
    sigma_d: f64,
    theta_l: &'a [f64],
    theta_d: &'a [f64],
}

impl<'a> BlockKernel<'a> {
    fn new(hp: &'a CoSvrHyperparams) -> Self {
        Self {
            cross_scale: hp.rho * hp.rho * hp.sigma_l,
            sigma_l: hp.sigma_l,
            sigma_d: hp.sigma_d,
            theta_l: &hp.theta_l,
            theta_d: &hp.theta_d,
        }
    }

    #[inline]
    fn low<'b>(&self, a: impl IntoIterator<Item = &'b f64>, b: impl IntoIterator<Item = &'b f64>) -> f64 {
        self.sigma_l * (-weighted_sq_dist(a, b, self.theta_l)).exp()
    }

    #[inline]
    fn cross<'b>(&self, a: impl IntoIterator<Item = &'b f64>, b: impl IntoIterator<Item = &'b f64>) -> f64 {
        self.cross_scale * (-weighted_sq_dist(a, b, self.theta_l)).exp()
    }

    #[inline]
    fn high<'b>(
        &self,
        a: impl IntoIterator<Item = &'b f64> + Clone,
        b: impl IntoIterator<Item = &'b f64> + Clone,
    ) -> f64 {
        self.cross_scale * (-weighted_sq_dist(a.clone(), b.clone(), self.theta_l)).exp()
            + self.sigma_d * (-weighted_sq_dist(a, b, self.theta_d)).exp()
    }
}

fn check_points(x_l: &DMatrix<f64>, x_h: &DMatrix<f64>, hp: &CoSvrHyperparams) -> Result<()> {
    let s = hp.dim();
    check_dim(s, hp.theta_d.len())?;
    check_dim(s, x_l.ncols())?;
    check_dim(s, x_h.ncols())?;
    if x_l.nrows() == 0 || x_h.nrows() == 0 {
        return Err(Error::Config("multi-fidelity kernel needs at least one LF and one HF point".into()));
    }
    Ok(())
}

/// Assembles the multi-fidelity kernel over LF rows `x_l` and HF rows `x_h`.
pub fn assemble_mfs_kernel(x_l: &DMatrix<f64>, x_h: &DMatrix<f64>, hp: &CoSvrHyperparams) -> Result<MfsKernelMatrix> {
    check_points(x_l, x_h, hp)?;
    Ok(assemble_unchecked(x_l, x_h, hp))
}

pub(crate) fn assemble_unchecked(x_l: &DMatrix<f64>, x_h: &DMatrix<f64>, hp: &CoSvrHyperparams) -> MfsKernelMatrix {
    let (p, q) = (x_l.nrows(), x_h.nrows());
    let blocks = BlockKernel::new(hp);
    let mut k = DMatrix::zeros(p + q, p + q);

    for i in 0..p {
        for j in i..p {
            let v = blocks.low(x_l.row(i).iter(), x_l.row(j).iter());
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        for j in 0..q {
            let v = blocks.cross(x_l.row(i).iter(), x_h.row(j).iter());
            k[(i, p + j)] = v;
            k[(p + j, i)] = v;
        }
    }
    for i in 0..q {
        for j in i..q {
            let v = blocks.high(x_h.row(i).iter(), x_h.row(j).iter());
            k[(p + i, p + j)] = v;
            k[(p + j, p + i)] = v;
        }
    }
    MfsKernelMatrix { values: k, p, q }
}

/// Kernel vector between an HF query point and all training points: the
/// first `p` entries use the H-L formula, the last `q` the H-H formula.
pub fn mfs_cross_vector(
    x_star: &[f64],
    x_l: &DMatrix<f64>,
    x_h: &DMatrix<f64>,
    hp: &CoSvrHyperparams,
) -> Result<Vec<f64>> {
    check_points(x_l, x_h, hp)?;
    check_dim(hp.dim(), x_star.len())?;
    Ok(cross_vector_unchecked(x_star, x_l, x_h, hp))
}

pub(crate) fn cross_vector_unchecked(
    x_star: &[f64],
    x_l: &DMatrix<f64>,
    x_h: &DMatrix<f64>,
    hp: &CoSvrHyperparams,
) -> Vec<f64> {
    let blocks = BlockKernel::new(hp);
    let mut out = Vec::with_capacity(x_l.nrows() + x_h.nrows());
    out.extend((0..x_l.nrows()).map(|i| blocks.cross(x_l.row(i).iter(), x_star)));
    out.extend((0..x_h.nrows()).map(|j| blocks.high(x_h.row(j).iter(), x_star)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hp(rho: f64, sigma_l: f64, sigma_d: f64, theta_l: Vec<f64>, theta_d: Vec<f64>) -> CoSvrHyperparams {
        CoSvrHyperparams {
            rho,
            sigma_l,
            sigma_d,
            theta_l,
            theta_d,
            gamma: 1e4,
        }
    }

    #[test]
    fn zero_distance_returns_sigma() {
        let k = KernelParams::new(2.5, vec![3.0, 0.1]).unwrap();
        assert_eq!(gauss_kernel(&[0.3, 0.7], &[0.3, 0.7], &k).unwrap(), 2.5);
    }

    #[test]
    fn zero_theta_erases_distance() {
        let k = KernelParams::new(1.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(gauss_kernel(&[0.0, 5.0], &[-3.0, 1.0], &k).unwrap(), 1.0);
    }

    #[test]
    fn unit_diagonal_distance() {
        // exp(-2) evaluated independently to 20 digits: 0.13533528323661269189
        let k = KernelParams::new(1.0, vec![1.0, 1.0]).unwrap();
        let v = gauss_kernel(&[0.0, 0.0], &[1.0, 1.0], &k).unwrap();
        assert!((v - 0.135_335_283_236_612_7).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = KernelParams::new(1.0, vec![1.0, 1.0]).unwrap();
        assert_eq!(
            gauss_kernel(&[0.0], &[1.0, 1.0], &k),
            Err(Error::Dimension { expected: 2, found: 1 })
        );
        assert!(KernelParams::new(-1.0, vec![1.0]).is_err());
        assert!(KernelParams::new(1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn coincident_points_give_block_pattern() {
        let x = DMatrix::from_row_slice(1, 2, &[0.4, 0.2]);
        let m = assemble_mfs_kernel(&x, &x, &hp(1.0, 1.0, 1.0, vec![5.0, 2.0], vec![0.3, 9.0])).unwrap();
        assert_eq!(m.values(), &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
    }

    #[test]
    fn zero_rho_decouples_fidelities() {
        let x_l = DMatrix::from_row_slice(3, 1, &[0.1, 0.5, 0.9]);
        let x_h = DMatrix::from_row_slice(2, 1, &[0.2, 0.7]);
        let h = hp(0.0, 1.3, 0.7, vec![2.0], vec![4.0]);
        let m = assemble_mfs_kernel(&x_l, &x_h, &h).unwrap();
        let v = m.values();
        for i in 0..3 {
            for j in 3..5 {
                assert_eq!(v[(i, j)], 0.0);
                assert_eq!(v[(j, i)], 0.0);
            }
        }
        let d = KernelParams::new(0.7, vec![4.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = gauss_kernel(&[x_h[(i, 0)]], &[x_h[(j, 0)]], &d).unwrap();
                assert_eq!(v[(3 + i, 3 + j)], expect);
            }
        }
        let c = mfs_cross_vector(&[0.33], &x_l, &x_h, &h).unwrap();
        assert!(c[..3].iter().all(|&v| v == 0.0));
    }

    /// Oracle: every entry computed from the block formulas by position.
    fn brute_force_entry(x_l: &DMatrix<f64>, x_h: &DMatrix<f64>, h: &CoSvrHyperparams, i: usize, j: usize) -> f64 {
        let p = x_l.nrows();
        let pt = |r: usize| -> Vec<f64> {
            if r < p {
                x_l.row(r).iter().copied().collect()
            } else {
                x_h.row(r - p).iter().copied().collect()
            }
        };
        let (a, b) = (pt(i), pt(j));
        let dist = |theta: &[f64]| -> f64 { (0..a.len()).map(|k| theta[k] * (a[k] - b[k]).powi(2)).sum() };
        let g_l = (-dist(&h.theta_l)).exp();
        match (i < p, j < p) {
            (true, true) => h.sigma_l * g_l,
            (true, false) | (false, true) => h.rho.powi(2) * h.sigma_l * g_l,
            (false, false) => h.rho.powi(2) * h.sigma_l * g_l + h.sigma_d * (-dist(&h.theta_d)).exp(),
        }
    }

    #[test]
    fn matches_brute_force_blocks() {
        let x_l = DMatrix::from_row_slice(2, 2, &[0.12, 0.87, 0.55, 0.31]);
        let x_h = DMatrix::from_row_slice(2, 2, &[0.73, 0.05, 0.26, 0.64]);
        let h = hp(0.8, 1.7, 0.4, vec![3.0, 0.5], vec![12.0, 1.5]);
        let m = assemble_mfs_kernel(&x_l, &x_h, &h).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = brute_force_entry(&x_l, &x_h, &h, i, j);
                assert!((m.values()[(i, j)] - expect).abs() <= 1e-15 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn coincident_query_hits_high_block_diagonal() {
        let x_l = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let x_h = DMatrix::from_row_slice(2, 1, &[0.25, 0.75]);
        let h = hp(0.6, 2.0, 0.5, vec![1.0], vec![3.0]);
        let c = mfs_cross_vector(&[0.75], &x_l, &x_h, &h).unwrap();
        assert_eq!(c[3], 0.36 * 2.0 + 0.5);
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let x_l = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let x_h = DMatrix::from_row_slice(1, 1, &[0.5]);
        let h = hp(0.6, 2.0, 0.5, vec![1.0, 1.0], vec![3.0, 1.0]);
        assert!(matches!(assemble_mfs_kernel(&x_l, &x_h, &h), Err(Error::Dimension { .. })));
        assert!(matches!(
            mfs_cross_vector(&[0.1], &x_l, &x_l, &h),
            Err(Error::Dimension { .. })
        ));
    }

    fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
        m.clone().symmetric_eigen().eigenvalues.min()
    }

    fn points(n: usize, s: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(0.0f64..1.0, n * s).prop_map(move |v| DMatrix::from_row_slice(n, s, &v))
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric_and_bounded(
            x in prop::collection::vec(-3.0f64..3.0, 3),
            y in prop::collection::vec(-3.0f64..3.0, 3),
            theta in prop::collection::vec(0.0f64..50.0, 3),
            sigma in 0.0f64..10.0,
        ) {
            let k = KernelParams::new(sigma, theta).unwrap();
            let a = gauss_kernel(&x, &y, &k).unwrap();
            let b = gauss_kernel(&y, &x, &k).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a >= 0.0 && a <= sigma);
        }

        #[test]
        fn assembled_matrix_is_exactly_symmetric(
            x_l in points(4, 2),
            x_h in points(3, 2),
            rho in 0.0f64..1.5,
            theta in prop::collection::vec(0.001f64..20.0, 4),
        ) {
            let h = hp(rho, 1.3, 0.6, theta[..2].to_vec(), theta[2..].to_vec());
            let m = assemble_mfs_kernel(&x_l, &x_h, &h).unwrap();
            let v = m.values();
            prop_assert_eq!(v, &v.transpose());
            prop_assert_eq!((m.p(), m.q()), (4, 3));
        }

        #[test]
        fn cross_vector_is_appended_row(
            x_l in points(3, 2),
            x_h in points(2, 2),
            x_star in prop::collection::vec(0.0f64..1.0, 2),
            rho in 0.0f64..1.0,
            theta in prop::collection::vec(0.001f64..20.0, 4),
        ) {
            let h = hp(rho, 0.9, 1.4, theta[..2].to_vec(), theta[2..].to_vec());
            let mut grown = x_h.clone().insert_row(2, 0.0);
            grown.row_mut(2).copy_from_slice(&x_star);
            let m = assemble_mfs_kernel(&x_l, &grown, &h).unwrap();
            let c = mfs_cross_vector(&x_star, &x_l, &x_h, &h).unwrap();
            let last = m.values().nrows() - 1;
            for (j, cj) in c.iter().enumerate() {
                prop_assert_eq!(m.values()[(last, j)], *cj);
            }
        }

        #[test]
        fn low_low_block_is_psd(
            n in 2usize..50,
            seed_pts in prop::collection::vec(0.0f64..1.0, 150),
            sigma in 0.01f64..10.0,
            theta in prop::collection::vec(0.01f64..30.0, 3),
        ) {
            let pts = DMatrix::from_fn(n, 3, |i, k| seed_pts[(i * 3 + k) % seed_pts.len()] + 1e-3 * i as f64);
            let k = KernelParams::new(sigma, theta).unwrap();
            let g = gram(&pts, &k);
            prop_assert!(min_eigenvalue(&g) >= -1e-8 * sigma);
        }
    }
}
