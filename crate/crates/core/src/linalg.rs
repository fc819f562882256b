//! Dense solver for the bordered LS-SVR system
//!
//! ```text
//! [ K + I/γ   1 ] [ α ]   [ y ]
//! [ 1ᵀ        0 ] [ b ] = [ 0 ]
//! ```
//!
//! The bordered matrix is symmetric but indefinite, so it is factored with
//! partial-pivot LU. The 1-norm condition number is estimated with the
//! Hager/Higham iteration, reusing the factorization for every solve.

use nalgebra::{DMatrix, DVector, LU};

use crate::{Error, Result};

/// Training systems whose condition estimate exceeds this are rejected.
pub(crate) const MAX_CONDITION: f64 = 1e12;

pub(crate) struct BorderedSolve {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub alpha: DVector<f64>,
    pub bias: f64,
    pub condition: f64,
}

/// Builds `[[K + I/γ, 1], [1ᵀ, 0]]` from a square kernel matrix.
pub(crate) fn bordered_matrix(kernel: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let n = kernel.nrows();
    let ridge = 1.0 / gamma;
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(kernel);
    for i in 0..n {
        a[(i, i)] += ridge;
        a[(i, n)] = 1.0;
        a[(n, i)] = 1.0;
    }
    a
}

/// Solves the bordered system for `(α, b)`.
///
/// `context` is only evaluated when the system is rejected and ends up in the
/// error message.
pub(crate) fn solve_bordered(
    kernel: &DMatrix<f64>,
    gamma: f64,
    y: &DVector<f64>,
    context: impl FnOnce() -> String,
) -> Result<BorderedSolve> {
    let n = kernel.nrows();
    debug_assert_eq!(kernel.ncols(), n);
    debug_assert_eq!(y.len(), n);

    let a = bordered_matrix(kernel, gamma);
    let norm = one_norm(&a);
    let lu = a.lu();

    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(y);
    let solution = lu.solve(&rhs);
    let condition = match &solution {
        Some(_) if norm.is_finite() => norm * inverse_one_norm_estimate(&lu, n + 1),
        _ => f64::INFINITY,
    };
    let solution = match solution {
        Some(s) if condition.is_finite() && condition <= MAX_CONDITION && s.iter().all(|v| v.is_finite()) => s,
        _ => {
            return Err(Error::IllConditioned {
                condition,
                context: context(),
            })
        }
    };

    Ok(BorderedSolve {
        alpha: solution.rows(0, n).into_owned(),
        bias: solution[n],
        condition,
        lu,
    })
}

impl BorderedSolve {
    /// Diagonal of the inverse bordered matrix restricted to the first `n`
    /// rows. Used by the closed-form leave-one-out residuals.
    pub fn inverse_diagonal(&self) -> DVector<f64> {
        let m = self.alpha.len() + 1;
        let mut diag = DVector::zeros(m - 1);
        let mut e = DVector::zeros(m);
        for i in 0..m - 1 {
            e[i] = 1.0;
            if let Some(col) = self.lu.solve(&e) {
                diag[i] = col[i];
            } else {
                diag[i] = f64::NAN;
            }
            e[i] = 0.0;
        }
        diag
    }

    /// Closed-form leave-one-out residuals `αᵢ / (A⁻¹)ᵢᵢ`.
    pub fn loo_residuals(&self) -> DVector<f64> {
        let diag = self.inverse_diagonal();
        self.alpha.zip_map(&diag, |a, d| a / d)
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of `‖A⁻¹‖₁` with Higham's alternating-sign safeguard.
/// The bordered matrix is symmetric so transposed solves reuse the same LU.
fn inverse_one_norm_estimate(lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> f64 {
    let solve = |v: &DVector<f64>| lu.solve(v).unwrap_or_else(|| DVector::from_element(n, f64::INFINITY));

    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = solve(&x);
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        if !estimate.is_finite() {
            return f64::INFINITY;
        }
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve(&xi);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if zmax <= z.dot(&x) || j == last_j {
            break;
        }
        last_j = j;
        x.fill(0.0);
        x[j] = 1.0;
    }

    let alt = if n > 1 {
        DVector::from_fn(n, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + i as f64 / (n - 1) as f64)
        })
    } else {
        DVector::from_element(1, 1.0)
    };
    let alt_est = 2.0 * solve(&alt).iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
    estimate.max(alt_est)
}
